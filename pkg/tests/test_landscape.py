import numpy as np
import pytest

from qwalk.errors import LandscapeFormatError, ValidationError
from qwalk.landscape import (
    EnergyLandscape,
    bundled_landscape,
    bundled_landscape_names,
    format_landscape,
    load_landscape,
    parse_landscape,
    save_landscape,
)


def test_bundled_names():
    assert bundled_landscape_names() == ["toy_1x3", "toy_2x2", "toy_2x3", "toy_3x1"]


def test_toy22_summary(toy22):
    s = toy22.summary()
    assert (s["coords"], s["bits"], s["states"], s["ground"]) == (2, 2, 16, 1)


def test_index_packing_little_endian():
    land = EnergyLandscape(3, 2, np.arange(64.0))
    assert land.index((1, 0, 0)) == 1
    assert land.index((0, 1, 0)) == 4
    assert land.index((3, 2, 1)) == 3 + 2 * 4 + 1 * 16
    for s in range(64):
        assert land.index(land.coords(s)) == s


def test_neighbor_table_moves():
    land = EnergyLandscape(2, 2, np.zeros(16))
    s = land.index((3, 0))
    assert land.coords(land.neighbor_table[0, s]) == (0, 0)  # +1 wraps
    assert land.coords(land.neighbor_table[1, s]) == (2, 0)
    assert land.coords(land.neighbor_table[2, s]) == (3, 1)
    assert land.coords(land.neighbor_table[3, s]) == (3, 3)  # -1 wraps


def test_moves_are_bijections_with_inverse(bundled):
    table = bundled.neighbor_table
    states = np.arange(bundled.num_states)
    for m in range(bundled.num_moves):
        assert sorted(table[m]) == list(states)
        np.testing.assert_array_equal(table[m ^ 1][table[m]], states)


def test_ground_set_exact_minimum():
    land = EnergyLandscape(1, 2, [0.5, -1.0, 0.2, -1.0])
    assert land.ground_set == (1, 3)


def test_round_trip(tmp_path, bundled):
    path = tmp_path / "l.txt"
    save_landscape(bundled, path)
    back = load_landscape(path)
    np.testing.assert_array_equal(back.energies, bundled.energies)
    assert format_landscape(back) == format_landscape(bundled)


def test_bundled_file_is_canonical():
    land = bundled_landscape("toy_2x2")
    text = format_landscape(land)
    assert text.splitlines()[0] == "coords=2 bits=2"
    assert len(text.splitlines()) == 17


@pytest.mark.parametrize(
    "text,line",
    [
        ("", 1),
        ("coords=1\n0\n1\n", 1),
        ("coords=0 bits=1\n", 1),
        ("coordinates=1 bits=1\n0\n1\n", 1),
        ("coords=1 bits=1\n0\nx\n", 3),
        ("coords=1 bits=1\n0\nnan\n", 3),
        ("coords=1 bits=1\n\n1\n", 2),
    ],
)
def test_malformed_line_numbers(text, line):
    with pytest.raises(LandscapeFormatError) as info:
        parse_landscape(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}: ")


@pytest.mark.parametrize("body", ["0\n", "0\n1\n2\n"])
def test_wrong_line_count(body):
    with pytest.raises(LandscapeFormatError, match="expected 2 energy lines"):
        parse_landscape("coords=1 bits=1\n" + body)


def test_validation():
    with pytest.raises(ValidationError):
        EnergyLandscape(1, 1, [0.0])
    with pytest.raises(ValidationError):
        EnergyLandscape(1, 1, [0.0, np.inf])
    with pytest.raises(ValidationError):
        EnergyLandscape(0, 1, [])


def test_permute_coords():
    land = EnergyLandscape(2, 2, np.arange(16.0))
    swapped = land.permute_coords([1, 0])
    for s in range(16):
        c0, c1 = land.coords(s)
        assert swapped.energies[swapped.index((c1, c0))] == land.energies[s]
