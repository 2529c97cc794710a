import math
from collections import Counter
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Tuple

from ..models.tree import (
    CanonicalCode,
    DegreeModel,
    DegreeViolationError,
    PolyaRecord,
    RootedTree,
    TreeError,
)

OPEN = b"("
CLOSE = b")"


class TreeService:
    """Servicio de formas canónicas, automorfismos y pesos de clase de árboles enraizados."""

    @staticmethod
    def _codes_and_auts(tree: RootedTree) -> Tuple[List[CanonicalCode], List[int]]:
        """Códigos AHU y |Aut| de cada subárbol, de las hojas hacia la raíz."""
        n = tree.size
        codes: List[CanonicalCode] = [b""] * n
        auts = [1] * n
        # En preorden los hijos siempre tienen índice mayor que el padre
        for vertex in range(n - 1, -1, -1):
            kids = tree.children[vertex]
            child_codes = sorted(codes[c] for c in kids)
            codes[vertex] = OPEN + b"".join(child_codes) + CLOSE
            aut = 1
            for c in kids:
                aut *= auts[c]
            for multiplicity in Counter(child_codes).values():
                aut *= math.factorial(multiplicity)
            auts[vertex] = aut
        return codes, auts

    @classmethod
    def canonical_code(cls, tree: RootedTree) -> CanonicalCode:
        return cls._codes_and_auts(tree)[0][0]

    @classmethod
    def are_isomorphic(cls, a: RootedTree, b: RootedTree) -> bool:
        if a.size != b.size:
            return False
        return cls.canonical_code(a) == cls.canonical_code(b)

    @classmethod
    def aut_size(cls, tree: RootedTree) -> int:
        """|Aut T| = prod mult(B)! · |Aut B|^mult(B) sobre las ramas agrupadas por clase."""
        return cls._codes_and_auts(tree)[1][0]

    @staticmethod
    def degree_factorial_product(tree: RootedTree) -> int:
        result = 1
        for kids in tree.children:
            result *= math.factorial(len(kids))
        return result

    @classmethod
    def plane_representations(cls, tree: RootedTree) -> int:
        """PR(P) = prod deg(v)! / |Aut P|; número de encajes planos distintos."""
        total = cls.degree_factorial_product(tree)
        aut = cls.aut_size(tree)
        if total % aut:
            raise TreeError("|Aut| no divide el producto de factoriales de grados")
        return total // aut

    @staticmethod
    def _validate_degrees(tree: RootedTree, model: DegreeModel) -> None:
        for vertex, kids in enumerate(tree.children):
            if not model.allows(len(kids)):
                raise DegreeViolationError(
                    f"El vértice {vertex} tiene grado de salida {len(kids)}, "
                    f"no permitido en el modelo {model.name}"
                )

    @classmethod
    def class_weight(cls, tree: RootedTree, model: DegreeModel) -> Fraction:
        """
        W(P) = prod w_deg(v) · deg(v)! / |Aut P|.

        Raises:
            DegreeViolationError: Si algún grado de salida no está en D
        """
        cls._validate_degrees(tree, model)
        weight = Fraction(1)
        for kids in tree.children:
            k = len(kids)
            weight *= model.weight(k) * math.factorial(k)
        return weight / cls.aut_size(tree)

    @staticmethod
    def degree_profile(tree: RootedTree) -> Dict[int, int]:
        return dict(Counter(len(kids) for kids in tree.children))

    @classmethod
    def record(cls, tree: RootedTree, model: DegreeModel) -> PolyaRecord:
        codes, auts = cls._codes_and_auts(tree)
        profile = cls.degree_profile(tree)
        return PolyaRecord(
            code=codes[0],
            n=tree.size,
            aut=auts[0],
            pr=cls.degree_factorial_product(tree) // auts[0],
            weight=cls.class_weight(tree, model),
            degree_profile=tuple(sorted(profile.items())),
        )

    @staticmethod
    def parse_code(code: CanonicalCode) -> RootedTree:
        """
        Reconstruye un representante a partir de un código AHU.

        Raises:
            TreeError: Si el código no está bien parentizado
        """
        if not code or code[:1] != OPEN:
            raise TreeError("El código canónico debe comenzar con '('")
        degrees: List[int] = []
        open_stack: List[int] = []
        closed_root = False
        for byte in code:
            if closed_root:
                raise TreeError("Contenido sobrante tras cerrar la raíz")
            if byte == OPEN[0]:
                if open_stack:
                    degrees[open_stack[-1]] += 1
                open_stack.append(len(degrees))
                degrees.append(0)
            elif byte == CLOSE[0]:
                if not open_stack:
                    raise TreeError("Paréntesis de cierre sin apertura")
                open_stack.pop()
                closed_root = not open_stack
            else:
                raise TreeError(f"Byte inesperado en el código: {byte!r}")
        if open_stack:
            raise TreeError("El código canónico no está cerrado")
        return RootedTree.from_preorder_degrees(degrees)

    @classmethod
    def brute_force_isomorphic(cls, a: RootedTree, b: RootedTree) -> bool:
        """Decisión exhaustiva probando todas las permutaciones de hijos (solo para tamaños pequeños)."""
        if a.size != b.size:
            return False

        def matches(u: int, v: int) -> bool:
            left = a.children[u]
            right = b.children[v]
            if len(left) != len(right):
                return False
            for order in permutations(right):
                if all(matches(x, y) for x, y in zip(left, order)):
                    return True
            return False

        return matches(0, 0)
