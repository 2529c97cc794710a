import unittest
from fractions import Fraction

from app.utils.validators import (
    validate_choice,
    validate_degree_model,
    validate_integer_input,
    validate_marks,
    validate_numeric_input,
    validate_rational_input,
    validate_required_field,
    validate_seed,
    validate_size_range,
)


class TestValidators(unittest.TestCase):
    """Pruebas para los validadores de parámetros."""

    def test_required_field(self):
        self.assertEqual(validate_required_field("  5 ", "n"), "5")
        with self.assertRaises(ValueError) as context:
            validate_required_field("  ", "n")
        self.assertIn("n", str(context.exception))

    def test_numeric_input(self):
        self.assertEqual(validate_numeric_input("0.95", "nivel"), 0.95)
        with self.assertRaises(ValueError):
            validate_numeric_input("abc", "nivel")
        with self.assertRaises(ValueError):
            validate_numeric_input("0", "paso", positive=True)

    def test_integer_input(self):
        self.assertEqual(validate_integer_input("12", "n"), 12)
        self.assertEqual(validate_integer_input("0", "flujo", minimum=0), 0)
        for bad in ("abc", "1.5", "0"):
            with self.assertRaises(ValueError):
                validate_integer_input(bad, "n")

    def test_rational_input(self):
        self.assertEqual(validate_rational_input("1/2", "t"), Fraction(1, 2))
        self.assertEqual(validate_rational_input("0.25", "t"), Fraction(1, 4))
        for bad in ("1/0", "x", "-1"):
            with self.assertRaises(ValueError):
                validate_rational_input(bad, "t")

    def test_size_range(self):
        self.assertEqual(validate_size_range("5"), [5])
        self.assertEqual(validate_size_range("3..6"), [3, 4, 5, 6])
        self.assertEqual(validate_size_range("8,3,5,3"), [3, 5, 8])
        with self.assertRaises(ValueError):
            validate_size_range("6..3")

    def test_seed(self):
        self.assertEqual(validate_seed(str(2 ** 64 - 1)), 2 ** 64 - 1)
        with self.assertRaises(ValueError):
            validate_seed(str(2 ** 64))

    def test_choice(self):
        self.assertEqual(validate_choice("WILSON", ["wilson", "normal"], "método"), "wilson")
        with self.assertRaises(ValueError):
            validate_choice("exact", ["wilson", "normal"], "método")

    def test_degree_model_presets_and_custom(self):
        self.assertEqual(validate_degree_model("ub").name, "ub")
        custom = validate_degree_model("custom", "0,1,3", "1,2,1/6")
        self.assertEqual(custom.weight(3), Fraction(1, 6))
        self.assertFalse(custom.allows(2))
        with self.assertRaises(ValueError):
            validate_degree_model("nope")
        with self.assertRaises(ValueError):
            validate_degree_model("custom", "0,1", "1")

    def test_marks(self):
        self.assertEqual(validate_marks(None, [0, 2]), [1, 1])
        self.assertEqual(validate_marks("2,1/2", [0, 2]), [2, Fraction(1, 2)])
        with self.assertRaises(ValueError):
            validate_marks("2", [0, 2])


if __name__ == '__main__':
    unittest.main()
