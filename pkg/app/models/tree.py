import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

CanonicalCode = bytes


class TreeError(Exception):
    """Excepción personalizada para errores con árboles enraizados."""
    pass


class DegreeViolationError(TreeError):
    """Un vértice tiene un grado de salida fuera del conjunto permitido."""
    pass


class ResourceLimitError(TreeError):
    """El tamaño pedido supera el techo configurado de enumeración."""
    pass


@dataclass(frozen=True)
class RootedTree:
    """Árbol enraizado ordenado: listas de hijos en disposición de preorden (raíz = 0)."""
    children: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.children)
        if n == 0:
            raise TreeError("Un árbol necesita al menos un vértice")
        seen = [False] * n
        for parent, kids in enumerate(self.children):
            for child in kids:
                if child <= parent or child >= n or seen[child]:
                    raise TreeError(f"Estructura inválida en el vértice {parent}")
                seen[child] = True
        if seen[0] or not all(seen[1:]):
            raise TreeError("El árbol no es conexo o tiene más de una raíz")

    @property
    def size(self) -> int:
        return len(self.children)

    def out_degrees(self) -> List[int]:
        return [len(kids) for kids in self.children]

    @classmethod
    def leaf(cls) -> "RootedTree":
        return cls(((),))

    @classmethod
    def from_preorder_degrees(cls, degrees: Sequence[int]) -> "RootedTree":
        """Reconstruye el árbol a partir de su palabra de Łukasiewicz (grados en preorden)."""
        n = len(degrees)
        if n == 0 or sum(degrees) != n - 1:
            raise TreeError("La secuencia de grados no describe un árbol")
        children: List[List[int]] = [[] for _ in range(n)]
        stack: List[Tuple[int, int]] = []
        for vertex, degree in enumerate(degrees):
            if vertex > 0:
                if not stack:
                    raise TreeError("La secuencia de grados no es un recorrido válido")
                parent, pending = stack.pop()
                children[parent].append(vertex)
                if pending > 1:
                    stack.append((parent, pending - 1))
            if degree > 0:
                stack.append((vertex, degree))
        if stack:
            raise TreeError("La secuencia de grados deja hijos sin asignar")
        return cls(tuple(tuple(kids) for kids in children))

    @classmethod
    def from_branches(cls, branches: Iterable["RootedTree"]) -> "RootedTree":
        """Raíz nueva con las ramas dadas, en ese orden."""
        degrees = [0]
        count = 0
        for branch in branches:
            degrees.extend(branch.preorder_degrees())
            count += 1
        degrees[0] = count
        return cls.from_preorder_degrees(degrees)

    @classmethod
    def from_parent_array(cls, parents: Sequence[int]) -> "RootedTree":
        """parents[v] es el padre de v; la raíz lleva -1."""
        roots = [v for v, p in enumerate(parents) if p < 0]
        if len(roots) != 1:
            raise TreeError(f"Se esperaba exactamente una raíz (encontradas: {len(roots)})")
        edges = [(v, p) for v, p in enumerate(parents) if p >= 0]
        return cls.from_adjacency(len(parents), edges, roots[0])

    @classmethod
    def from_adjacency(cls, n: int, edges: Iterable[Tuple[int, int]], root: int) -> "RootedTree":
        """Orienta un árbol no dirigido desde la raíz y lo renumera en preorden."""
        adjacency: List[List[int]] = [[] for _ in range(n)]
        for a, b in edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
        degrees = []
        stack = [(root, -1)]
        while stack:
            vertex, parent = stack.pop()
            kids = [w for w in adjacency[vertex] if w != parent]
            degrees.append(len(kids))
            for w in reversed(kids):
                stack.append((w, vertex))
        if len(degrees) != n:
            raise TreeError("Las aristas no forman un árbol conexo")
        return cls.from_preorder_degrees(degrees)

    def preorder_degrees(self) -> List[int]:
        result = []
        stack = [0]
        while stack:
            vertex = stack.pop()
            result.append(len(self.children[vertex]))
            stack.extend(reversed(self.children[vertex]))
        return result

    def branches(self) -> List["RootedTree"]:
        """Ramas de la raíz como árboles independientes."""
        result = []
        for child in self.children[0]:
            result.append(self.subtree(child))
        return result

    def subtree(self, vertex: int) -> "RootedTree":
        degrees = []
        stack = [vertex]
        while stack:
            current = stack.pop()
            degrees.append(len(self.children[current]))
            stack.extend(reversed(self.children[current]))
        return RootedTree.from_preorder_degrees(degrees)


class TailRule(Enum):
    """Regla de pesos para grados no listados en modelos sin cota de grado."""
    NONE = "none"
    ONE = "one"
    INVERSE_FACTORIAL = "inverse_factorial"


@dataclass(frozen=True)
class DegreeModel:
    """Conjunto D de grados de salida permitidos con sus pesos w_k."""
    name: str
    weights: Tuple[Tuple[int, Fraction], ...]
    tail: TailRule = TailRule.NONE

    def __post_init__(self):
        degrees = [k for k, _ in self.weights]
        if len(set(degrees)) != len(degrees):
            raise TreeError("Grados repetidos en el modelo")
        if any(k < 0 for k in degrees):
            raise TreeError("Los grados deben ser no negativos")
        if any(w < 0 for _, w in self.weights):
            raise TreeError("Los pesos deben ser no negativos")
        if self.weight(0) <= 0:
            raise TreeError("El grado 0 debe estar permitido con peso positivo")
        if not self.unbounded and not any(k >= 2 and w > 0 for k, w in self.weights):
            raise TreeError("Se necesita algún grado k >= 2 con peso positivo")

    @classmethod
    def from_lists(cls, degrees: Sequence[int], weights: Sequence, name: Optional[str] = None) -> "DegreeModel":
        if len(degrees) != len(weights):
            raise TreeError(
                f"El número de pesos ({len(weights)}) no coincide con el número de grados ({len(degrees)})"
            )
        pairs = tuple(sorted((int(k), Fraction(w)) for k, w in zip(degrees, weights)))
        if name is None:
            name = "D=" + ",".join(str(k) for k, _ in pairs)
        return cls(name=name, weights=pairs)

    @classmethod
    def from_weight_vector(cls, weights: Sequence, name: str) -> "DegreeModel":
        """Vector w = [w_0, w_1, ...]; los grados con peso cero quedan fuera de D."""
        pairs = tuple((k, Fraction(w)) for k, w in enumerate(weights) if Fraction(w) != 0)
        return cls(name=name, weights=pairs)

    @classmethod
    def plane(cls) -> "DegreeModel":
        return cls(name="plane", weights=((0, Fraction(1)),), tail=TailRule.ONE)

    @classmethod
    def poisson(cls) -> "DegreeModel":
        """Árboles etiquetados vistos como Galton–Watson: w_k = 1/k!."""
        return cls(name="poisson", weights=((0, Fraction(1)),), tail=TailRule.INVERSE_FACTORIAL)

    @classmethod
    def unary_binary(cls) -> "DegreeModel":
        return cls.from_weight_vector([1, 1, 1], "ub")

    @classmethod
    def binary121(cls) -> "DegreeModel":
        return cls.from_weight_vector([1, 2, 1], "binary121")

    @classmethod
    def binary(cls) -> "DegreeModel":
        return cls.from_weight_vector([1, 0, 1], "binary")

    @classmethod
    def ternary(cls) -> "DegreeModel":
        return cls.from_weight_vector([1, 1, 1, Fraction(1, 2)], "ternary")

    @property
    def unbounded(self) -> bool:
        return self.tail is not TailRule.NONE

    @property
    def max_degree(self) -> Optional[int]:
        if self.unbounded:
            return None
        return max(k for k, w in self.weights if w > 0)

    def weight(self, k: int) -> Fraction:
        for degree, w in self.weights:
            if degree == k:
                return w
        if self.tail is TailRule.ONE:
            return Fraction(1)
        if self.tail is TailRule.INVERSE_FACTORIAL:
            return Fraction(1, math.factorial(k))
        return Fraction(0)

    def allows(self, k: int) -> bool:
        return self.weight(k) > 0

    def support(self, limit: int) -> List[int]:
        """Grados permitidos (peso positivo) hasta el límite dado."""
        if self.unbounded:
            return [k for k in range(limit + 1) if self.allows(k)]
        return [k for k, w in self.weights if w > 0 and k <= limit]

    def weight_map(self, limit: int) -> Dict[int, Fraction]:
        return {k: self.weight(k) for k in self.support(limit)}

    @property
    def signature(self) -> str:
        listed = ",".join(f"{k}:{w}" for k, w in self.weights)
        return f"{listed};tail={self.tail.value}"


@dataclass(frozen=True)
class PolyaRecord:
    """Una clase de isomorfismo (árbol de Pólya) con sus estadísticas exactas."""
    code: CanonicalCode
    n: int
    aut: int
    pr: int
    weight: Fraction
    degree_profile: Tuple[Tuple[int, int], ...]

    @property
    def leaves(self) -> int:
        return self.degree_count(0)

    def degree_count(self, degree: int) -> int:
        for d, count in self.degree_profile:
            if d == degree:
                return count
        return 0

    @property
    def profile(self) -> Dict[int, int]:
        return dict(self.degree_profile)
