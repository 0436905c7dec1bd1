from utils.fresh import NameSupply, fresh_name


def test_fresh_name():
    assert fresh_name("x", set()) == "x"
    assert fresh_name("x", {"x"}) == "x_1"
    assert fresh_name("x_1", {"x", "x_1"}) == "x_2"
    assert fresh_name("x", {"x", "x_1", "x_2"}) == "x_3"


def test_name_supply_skips_taken_names():
    supply = NameSupply("t", {"t1"})
    assert [supply(), supply()] == ["t0", "t2"]
    supply.reserve({"t3"})
    assert supply() == "t4"
