import pytest

M1_TEXT = """\
feature Phone {
  mandatory Screen
  optional GPS
}
feature Screen {
  xor { Basic, HD }
}
attribute GPS.price : int[1..3]
constraint HD => GPS
"""

M1_CONSEQUENCES = {
    "Phone": {1},
    "Screen": {1},
    "Basic": {0, 1},
    "HD": {0, 1},
    "GPS": {0, 1},
    "price": {0, 1, 2, 3},
}

M1_AFTER_HD = {
    "Phone": {1},
    "Screen": {1},
    "Basic": {0},
    "HD": {1},
    "GPS": {1},
    "price": {1, 2, 3},
}


@pytest.fixture
def m1_text():
    return M1_TEXT


@pytest.fixture
def m1():
    from fdconfig import parse_model

    return parse_model(M1_TEXT)


@pytest.fixture
def m1_compiled(m1):
    from fdconfig import compile_model

    return compile_model(m1)
