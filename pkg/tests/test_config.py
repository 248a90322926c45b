import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractgv import FormatError
from fractgv.config import load_config, normalise_key, parse_config


def test_parse_basic():
    text = "# solver\nmax-iter = 500\ntol_rel=1e-7  # tighter\n\nrule=cell\n"
    assert parse_config(text) == {"max_iter": "500", "tol_rel": "1e-7", "rule": "cell"}


def test_value_may_contain_equals():
    assert parse_config("out=a=b.csv\n") == {"out": "a=b.csv"}


@pytest.mark.parametrize("text, lineno", [
    ("a=1\nnonsense\n", 2),
    ("a=1\n=2\n", 2),
    ("a=1\nb=2\na=3\n", 3),
    ("a=1\nmax-iter=1\nmax_iter=2\n", 3),
])
def test_errors_carry_line(text, lineno):
    with pytest.raises(FormatError) as info:
        parse_config(text, "run.cfg")
    assert info.value.lineno == lineno
    assert f"run.cfg:{lineno}" in str(info.value)


def test_load(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_bytes(b"seed=4\r\nsigma=0.1\r\n")
    assert load_config(path) == {"seed": "4", "sigma": "0.1"}
    with pytest.raises(FormatError):
        load_config(tmp_path / "missing.cfg")


keys = st.from_regex(r"[a-z][a-z0-9_\-]{0,10}", fullmatch=True)
values = st.from_regex(r"[A-Za-z0-9.:,;+\-]{0,12}", fullmatch=True)


@given(st.dictionaries(keys, values, max_size=8))
def test_round_trip(entries):
    normalised = {}
    for k, v in entries.items():
        normalised.setdefault(normalise_key(k), v)
    text = "".join(f"{k} = {v}\n" for k, v in normalised.items())
    assert parse_config(text) == normalised
