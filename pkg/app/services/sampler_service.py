import bisect
import heapq
import logging
import math
import threading
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..models.sampling import ModelKind, RngSpec, SamplingError, SamplingModel
from ..models.tree import DegreeModel, ResourceLimitError, RootedTree

logger = logging.getLogger(__name__)

RandomSource = Union[RngSpec, np.random.Generator]


def _generator(rng: RandomSource) -> np.random.Generator:
    if isinstance(rng, RngSpec):
        return rng.generator()
    return rng


def uniform_below(generator: np.random.Generator, bound: int) -> int:
    """Entero uniforme en [0, bound) para bound arbitrariamente grande (palabras de 32 bits y rechazo)."""
    if bound <= 0:
        raise SamplingError(f"La cota debe ser positiva (recibida: {bound})")
    if bound == 1:
        return 0
    bits = (bound - 1).bit_length()
    words = (bits + 31) // 32
    excess = words * 32 - bits
    while True:
        value = 0
        for word in generator.integers(0, 2 ** 32, size=words, dtype=np.uint64):
            value = (value << 32) | int(word)
        value >>= excess
        if value < bound:
            return value


def multiset_count(kinds: int, size: int) -> int:
    """Multiconjuntos de `size` elementos tomados de `kinds` tipos."""
    if size == 0:
        return 1
    if kinds <= 0:
        return 0
    return math.comb(kinds + size - 1, size)


class _PolyaTables:
    """
    Tablas de conteo para árboles de Pólya con grados en D:
    T(m) clases de tamaño m y F(m, k, s) multiconjuntos de k árboles de tamaño total m,
    todos de tamaño >= s, con F(m,k,s) = F(m,k,s+1) + sum_r MS(T(s), r) F(m - rs, k - r, s + 1).
    """

    def __init__(self, model: DegreeModel):
        self.model = model
        self.trees: List[int] = [0]
        # forests[m][s][k] para 1 <= s <= m + 1
        self.forests: List[List[List[int]]] = [[[1], [1]]]

    def root_degrees(self, n: int) -> List[int]:
        return self.model.support(n - 1)

    def forest(self, m: int, k: int, s: int) -> int:
        if k < 0:
            return 0
        if m == 0:
            return 1 if k == 0 else 0
        if s > m:
            return 0
        row = self.forests[m][s]
        return row[k] if k < len(row) else 0

    def extend_to(self, n: int) -> None:
        while len(self.trees) <= n:
            m = len(self.trees)
            self.trees.append(sum(self.forest(m - 1, k, 1) for k in self.root_degrees(m)))
            k_max = m if self.model.unbounded else min(m, self.model.max_degree)
            levels: List[List[int]] = [[] for _ in range(m + 2)]
            levels[m + 1] = [0] * (k_max + 1)
            self.forests.append(levels)
            for s in range(m, 0, -1):
                row = [0] * (k_max + 1)
                classes = self.trees[s]
                for k in range(1, k_max + 1):
                    total = levels[s + 1][k]
                    for r in range(1, min(k, m // s) + 1):
                        rest = self.forest(m - r * s, k - r, s + 1)
                        if rest:
                            total += multiset_count(classes, r) * rest
                    row[k] = total
                levels[s] = row


class SamplerService:
    """Servicio de generación aleatoria reproducible de árboles enraizados."""

    POLYA_SAMPLER_CEILING = 400
    UNBOUNDED_POLYA_SAMPLER_CEILING = 120

    _tables: Dict[str, _PolyaTables] = {}
    _cgw_tables: Dict[Tuple[str, int], List[List[int]]] = {}
    _lock = threading.Lock()

    @staticmethod
    def _validate_size(n: int) -> None:
        if not isinstance(n, int) or n < 1:
            raise SamplingError(f"El tamaño debe ser un entero positivo (recibido: {n})")

    @classmethod
    def prufer_decode(cls, sequence) -> List[Tuple[int, int]]:
        """Aristas del árbol etiquetado en {0..n-1} codificado por una sucesión de Prüfer de largo n-2."""
        n = len(sequence) + 2
        degree = [1] * n
        for label in sequence:
            degree[label] += 1
        leaves = [v for v in range(n) if degree[v] == 1]
        heapq.heapify(leaves)
        edges = []
        for label in sequence:
            leaf = heapq.heappop(leaves)
            edges.append((leaf, label))
            degree[label] -= 1
            if degree[label] == 1:
                heapq.heappush(leaves, label)
        edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
        return edges

    @classmethod
    def sample_labeled_rooted(cls, n: int, rng: RandomSource) -> RootedTree:
        """Árbol etiquetado enraizado uniforme entre los n^(n-1): Prüfer uniforme más raíz uniforme."""
        cls._validate_size(n)
        if n == 1:
            return RootedTree.leaf()
        generator = _generator(rng)
        sequence = [int(v) for v in generator.integers(0, n, size=n - 2)]
        root = int(generator.integers(0, n))
        return RootedTree.from_adjacency(n, cls.prufer_decode(sequence), root)

    @staticmethod
    def integer_weights(model: DegreeModel, limit: int) -> Dict[int, int]:
        """Pesos escalados a enteros; la ley condicionada no cambia."""
        weights = model.weight_map(limit)
        scale = 1
        for w in weights.values():
            scale = scale * w.denominator // math.gcd(scale, w.denominator)
        return {k: int(w * scale) for k, w in weights.items()}

    @classmethod
    def _cgw_table(cls, n: int, model: DegreeModel) -> Tuple[Dict[int, int], List[List[int]]]:
        """Z[i][s] = [z^s] Phi(z)^i para i <= n, s <= n - 1."""
        key = (model.signature, n)
        with cls._lock:
            cached = cls._cgw_tables.get(key)
        weights = cls.integer_weights(model, n - 1)
        if cached is not None:
            return weights, cached
        table = [[0] * n for _ in range(n + 1)]
        table[0][0] = 1
        for i in range(1, n + 1):
            previous = table[i - 1]
            row = table[i]
            for s in range(n):
                total = 0
                for k, w in weights.items():
                    if k > s:
                        continue
                    if previous[s - k]:
                        total += w * previous[s - k]
                row[s] = total
        with cls._lock:
            cls._cgw_tables[key] = table
        return weights, table

    @staticmethod
    def cycle_lemma_rotation(degrees: List[int]) -> List[int]:
        """Única rotación que es una palabra de Łukasiewicz: empieza tras el primer mínimo."""
        partial = 0
        minimum = 1
        position = 0
        for index, degree in enumerate(degrees):
            partial += degree - 1
            if partial < minimum:
                minimum = partial
                position = index
        start = position + 1
        return degrees[start:] + degrees[:start]

    @classmethod
    def sample_cgw(cls, n: int, model: DegreeModel, rng: RandomSource) -> RootedTree:
        """
        Galton–Watson condicionado a tamaño n: sucesión de grados con probabilidad
        proporcional a prod w_d y suma n - 1, rotada por el lema del ciclo.

        Raises:
            SamplingError: Si ningún árbol de tamaño n es compatible con D
        """
        cls._validate_size(n)
        weights, table = cls._cgw_table(n, model)
        if table[n][n - 1] == 0:
            raise SamplingError(f"El tamaño {n} no es alcanzable con el modelo {model.name}")
        if n == 1:
            return RootedTree.leaf()
        generator = _generator(rng)
        degrees = []
        remaining = n - 1
        for position in range(n):
            left = n - position - 1
            target = uniform_below(generator, table[left + 1][remaining])
            for k in sorted(weights):
                if k > remaining:
                    break
                mass = weights[k] * table[left][remaining - k]
                if target < mass:
                    degrees.append(k)
                    remaining -= k
                    break
                target -= mass
        return RootedTree.from_preorder_degrees(cls.cycle_lemma_rotation(degrees))

    @classmethod
    def sample_plane(cls, n: int, rng: RandomSource) -> RootedTree:
        """Árbol plano uniforme: GW condicionado con pesos constantes."""
        return cls.sample_cgw(n, DegreeModel.plane(), rng)

    @classmethod
    def _polya_tables(cls, n: int, model: DegreeModel) -> _PolyaTables:
        ceiling = cls.UNBOUNDED_POLYA_SAMPLER_CEILING if model.unbounded else cls.POLYA_SAMPLER_CEILING
        if n > ceiling:
            raise ResourceLimitError(
                f"n = {n} supera el techo de las tablas de conteo ({ceiling}) para el modelo {model.name}"
            )
        key = model.signature if not model.unbounded else "unbounded"
        with cls._lock:
            tables = cls._tables.get(key)
            if tables is None:
                tables = _PolyaTables(model)
                cls._tables[key] = tables
            tables.extend_to(n)
        return tables

    @classmethod
    def polya_count(cls, n: int, model: Optional[DegreeModel] = None) -> int:
        """Número de árboles de Pólya de tamaño n con grados en D."""
        cls._validate_size(n)
        model = model or DegreeModel.plane()
        return cls._polya_tables(n, model).trees[n]

    @staticmethod
    def _unrank_multiset(kinds: int, size: int, index: int) -> List[int]:
        """Multiconjunto no decreciente de `size` tipos en [0, kinds) con rango dado."""
        chosen = []
        low = 0
        while size > 0:
            available = multiset_count(kinds - low, size)
            # mayor a con available - MS(kinds - a, size) <= index
            lo, hi = low, kinds - 1
            while lo < hi:
                middle = (lo + hi + 1) // 2
                if available - multiset_count(kinds - middle, size) <= index:
                    lo = middle
                else:
                    hi = middle - 1
            index -= available - multiset_count(kinds - lo, size)
            chosen.append(lo)
            low = lo
            size -= 1
        return chosen

    @classmethod
    def _decode_class(cls, tables: _PolyaTables, n: int, index: int) -> List[Tuple[int, int]]:
        """Ramas (tamaño, índice de clase) de la clase de tamaño n con el rango dado."""
        m = n - 1
        for k in tables.root_degrees(n):
            count = tables.forest(m, k, 1)
            if index < count:
                break
            index -= count
        else:
            raise SamplingError(f"Rango fuera de la tabla para n = {n}")

        branches: List[Tuple[int, int]] = []
        s = 1
        while k > 0:
            skip = tables.forest(m, k, s + 1)
            if index < skip:
                s += 1
                continue
            index -= skip
            classes = tables.trees[s]
            for r in range(1, min(k, m // s) + 1):
                rest = tables.forest(m - r * s, k - r, s + 1)
                block = multiset_count(classes, r) * rest
                if index < block:
                    group, index = divmod(index, rest)
                    branches.extend((s, c) for c in cls._unrank_multiset(classes, r, group))
                    m -= r * s
                    k -= r
                    s += 1
                    break
                index -= block
            else:
                raise SamplingError("Rango inconsistente al decodificar un multiconjunto")
        return branches

    @classmethod
    def unrank_polya(cls, n: int, index: int, model: Optional[DegreeModel] = None) -> RootedTree:
        """Biyección entre [0, T(n)) y las clases de tamaño n (sin recursión en Python)."""
        cls._validate_size(n)
        model = model or DegreeModel.plane()
        tables = cls._polya_tables(n, model)
        if not 0 <= index < tables.trees[n]:
            raise SamplingError(f"Rango {index} fuera de [0, {tables.trees[n]})")
        degrees = []
        stack = [(n, index)]
        while stack:
            size, rank = stack.pop()
            branches = cls._decode_class(tables, size, rank)
            degrees.append(len(branches))
            stack.extend(reversed(branches))
        return RootedTree.from_preorder_degrees(degrees)

    @classmethod
    def sample_polya_uniform(
        cls,
        n: int,
        rng: RandomSource,
        model: Optional[DegreeModel] = None,
    ) -> RootedTree:
        """
        Árbol de Pólya uniforme entre las clases de tamaño n (con grados en D si se da un modelo).

        Raises:
            ResourceLimitError: Si n supera el techo de las tablas de conteo
            SamplingError: Si no hay clases de tamaño n
        """
        cls._validate_size(n)
        model = model or DegreeModel.plane()
        tables = cls._polya_tables(n, model)
        total = tables.trees[n]
        if total == 0:
            raise SamplingError(f"El tamaño {n} no es alcanzable con el modelo {model.name}")
        return cls.unrank_polya(n, uniform_below(_generator(rng), total), model)

    @classmethod
    def sample(cls, n: int, model: SamplingModel, rng: RandomSource) -> RootedTree:
        """Despacha según la ley de muestreo pedida."""
        if model.kind is ModelKind.LABELED:
            return cls.sample_labeled_rooted(n, rng)
        if model.kind is ModelKind.PLANE:
            return cls.sample_plane(n, rng)
        if model.kind is ModelKind.CGW:
            return cls.sample_cgw(n, model.degree_model, rng)
        return cls.sample_polya_uniform(n, rng, model.degree_model)

    @staticmethod
    def sample_index(generator: np.random.Generator, cumulative: List[int]) -> int:
        """Índice con probabilidad proporcional a los incrementos de `cumulative` (enteros exactos)."""
        target = uniform_below(generator, cumulative[-1])
        return bisect.bisect_right(cumulative, target)
