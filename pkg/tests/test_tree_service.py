import unittest
from fractions import Fraction
from itertools import combinations

from app.models.tree import DegreeModel, DegreeViolationError, RootedTree, TreeError
from app.services.enumeration_service import EnumerationService
from app.services.tree_service import TreeService


def tree(*degrees):
    return RootedTree.from_preorder_degrees(degrees)


class TestTreeService(unittest.TestCase):
    """Pruebas para formas canónicas, automorfismos y pesos de clase."""

    def test_child_order_does_not_change_code(self):
        self.assertEqual(TreeService.canonical_code(tree(2, 1, 0, 0)), TreeService.canonical_code(tree(2, 0, 1, 0)))
        self.assertTrue(TreeService.are_isomorphic(tree(2, 1, 0, 0), tree(2, 0, 1, 0)))

    def test_path_and_cherry_differ(self):
        self.assertFalse(TreeService.are_isomorphic(tree(1, 1, 0), tree(2, 0, 0)))

    def test_different_sizes_are_not_isomorphic(self):
        self.assertFalse(TreeService.are_isomorphic(tree(0), tree(1, 0)))

    def test_leaf_code(self):
        self.assertEqual(TreeService.canonical_code(RootedTree.leaf()), b"()")

    def test_star_automorphisms(self):
        self.assertEqual(TreeService.aut_size(tree(4, 0, 0, 0, 0)), 24)

    def test_nested_automorphisms(self):
        # raíz con dos cerezas: 2! · 2 · 2
        self.assertEqual(TreeService.aut_size(tree(2, 2, 0, 0, 2, 0, 0)), 8)

    def test_plane_representations(self):
        self.assertEqual(TreeService.plane_representations(tree(2, 1, 0, 0)), 2)
        self.assertEqual(TreeService.plane_representations(tree(2, 0, 0)), 1)

    def test_class_weight(self):
        self.assertEqual(TreeService.class_weight(tree(2, 1, 0, 0), DegreeModel.unary_binary()), 2)
        self.assertEqual(TreeService.class_weight(tree(2, 1, 0, 0), DegreeModel.binary121()), 4)
        self.assertEqual(TreeService.class_weight(tree(3, 0, 0, 0), DegreeModel.ternary()), Fraction(1, 2))
        self.assertEqual(TreeService.class_weight(tree(2, 0, 0), DegreeModel.poisson()), Fraction(1, 2))

    def test_class_weight_rejects_degrees_outside_model(self):
        with self.assertRaises(DegreeViolationError):
            TreeService.class_weight(tree(2, 1, 0, 0), DegreeModel.binary())

    def test_record(self):
        record = TreeService.record(tree(3, 0, 1, 0, 0), DegreeModel.plane())
        self.assertEqual(record.n, 5)
        self.assertEqual(record.aut, 2)
        self.assertEqual(record.pr, 3)
        self.assertEqual(record.leaves, 3)
        self.assertEqual(record.profile, {0: 3, 1: 1, 3: 1})

    def test_parse_code_reconstructs_class(self):
        original = tree(3, 2, 0, 0, 1, 0, 0)
        parsed = TreeService.parse_code(TreeService.canonical_code(original))
        self.assertTrue(TreeService.are_isomorphic(original, parsed))

    def test_parse_code_rejects_malformed(self):
        for code in (b"", b"(()", b"())", b"()()", b"(x)"):
            with self.assertRaises(TreeError):
                TreeService.parse_code(code)

    def test_brute_force_agrees_with_codes(self):
        """Pares de clases distintas de tamaño 6 y sus representantes reordenados."""
        trees = [TreeService.parse_code(r.code) for r in EnumerationService.enumerate_polya(6)]
        for a, b in combinations(trees, 2):
            self.assertFalse(TreeService.brute_force_isomorphic(a, b))
        for a in trees:
            mirrored = RootedTree.from_branches(reversed(a.branches()))
            self.assertTrue(TreeService.brute_force_isomorphic(a, mirrored))
            self.assertTrue(TreeService.are_isomorphic(a, mirrored))


class TestRootedTree(unittest.TestCase):
    """Pruebas para las construcciones de árboles enraizados."""

    def test_invalid_degree_sequences(self):
        for degrees in ([], [1, 1], [0, 0], [2, 0]):
            with self.assertRaises(TreeError):
                RootedTree.from_preorder_degrees(degrees)

    def test_preorder_roundtrip(self):
        degrees = [3, 0, 2, 0, 1, 0, 0]
        self.assertEqual(tree(*degrees).preorder_degrees(), degrees)

    def test_from_parent_array(self):
        built = RootedTree.from_parent_array([-1, 0, 0, 1])
        self.assertTrue(TreeService.are_isomorphic(built, tree(2, 1, 0, 0)))

    def test_from_parent_array_needs_one_root(self):
        with self.assertRaises(TreeError):
            RootedTree.from_parent_array([-1, -1, 0])

    def test_from_adjacency_depends_on_root(self):
        edges = [(0, 1), (1, 2)]
        self.assertEqual(RootedTree.from_adjacency(3, edges, 0).out_degrees(), [1, 1, 0])
        self.assertEqual(RootedTree.from_adjacency(3, edges, 1).out_degrees(), [2, 0, 0])

    def test_from_adjacency_rejects_disconnected(self):
        with self.assertRaises(TreeError):
            RootedTree.from_adjacency(4, [(0, 1), (2, 3), (2, 3)], 0)

    def test_branches_and_subtree(self):
        t = tree(2, 1, 0, 0)
        self.assertEqual([b.size for b in t.branches()], [2, 1])
        self.assertEqual(t.subtree(1).preorder_degrees(), [1, 0])


class TestDegreeModel(unittest.TestCase):
    """Pruebas para los modelos de grados."""

    def test_presets(self):
        self.assertEqual(DegreeModel.unary_binary().support(5), [0, 1, 2])
        self.assertEqual(DegreeModel.binary().support(5), [0, 2])
        self.assertEqual(DegreeModel.ternary().weight(3), Fraction(1, 2))
        self.assertEqual(DegreeModel.plane().support(3), [0, 1, 2, 3])
        self.assertEqual(DegreeModel.poisson().weight(3), Fraction(1, 6))
        self.assertIsNone(DegreeModel.plane().max_degree)

    def test_from_lists(self):
        model = DegreeModel.from_lists([0, 2], [1, "1/2"])
        self.assertEqual(model.weight(2), Fraction(1, 2))
        self.assertFalse(model.allows(1))
        self.assertEqual(model.name, "D=0,2")

    def test_invalid_models(self):
        with self.assertRaises(TreeError):
            DegreeModel.from_lists([1, 2], [1, 1])
        with self.assertRaises(TreeError):
            DegreeModel.from_lists([0, 1], [1, 1])
        with self.assertRaises(TreeError):
            DegreeModel.from_lists([0, 2], [1])


if __name__ == '__main__':
    unittest.main()
