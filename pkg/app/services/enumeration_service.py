import logging
import math
import threading
from collections import Counter
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ..models.catalog import ClassEntry, ExactMoments, MomentStatistic, PlaneDecayRow
from ..models.tree import DegreeModel, PolyaRecord, ResourceLimitError, TreeError
from .sampler_service import SamplerService
from .tree_service import CLOSE, OPEN

logger = logging.getLogger(__name__)


class _Catalog:
    """Clases de isomorfismo por tamaño para un soporte de grados fijo."""

    def __init__(self, allowed, max_degree: Optional[int]):
        self.allowed = allowed
        self.max_degree = max_degree
        self.levels: List[List[ClassEntry]] = [[]]

    def root_degrees(self, n: int) -> List[int]:
        limit = n - 1 if self.max_degree is None else min(n - 1, self.max_degree)
        return [k for k in range(limit + 1) if self.allowed(k)]

    def extend_to(self, n: int) -> None:
        while len(self.levels) <= n:
            size = len(self.levels)
            self.levels.append(self._build_level(size))
            logger.debug("Nivel %d del catálogo: %d clases", size, len(self.levels[size]))

    def _build_level(self, n: int) -> List[ClassEntry]:
        degrees = self.root_degrees(n)
        if not degrees:
            return []
        allowed = set(degrees)
        slots = max(degrees)
        entries = []
        if n == 1:
            return [ClassEntry(OPEN + CLOSE, 1, 1, (1,))] if 0 in allowed else []
        top = len(self.levels[n - 1]) - 1
        for chosen in self._multisets(n - 1, n - 1, top, slots):
            if len(chosen) in allowed:
                entries.append(self._combine(chosen, n))
        entries.sort(key=lambda entry: entry.code)
        return entries

    def _multisets(self, remaining: int, bound_size: int, bound_index: int, slots: int):
        """Multiconjuntos de ramas en orden no creciente de (tamaño, índice)."""
        if remaining == 0:
            yield []
            return
        if slots == 0:
            return
        for size in range(min(remaining, bound_size), 0, -1):
            if size * slots < remaining:
                break
            level = self.levels[size]
            top = bound_index if size == bound_size else len(level) - 1
            for index in range(top, -1, -1):
                for rest in self._multisets(remaining - size, size, index, slots - 1):
                    yield [(size, index)] + rest

    def _combine(self, chosen: Sequence[Tuple[int, int]], n: int) -> ClassEntry:
        branches = [self.levels[size][index] for size, index in chosen]
        code = OPEN + b"".join(sorted(branch.code for branch in branches)) + CLOSE
        aut = 1
        factorials = math.factorial(len(branches))
        profile = [0] * n
        for branch in branches:
            aut *= branch.aut
            factorials *= branch.factorials
            for degree, count in enumerate(branch.profile):
                profile[degree] += count
        for multiplicity in Counter(chosen).values():
            aut *= math.factorial(multiplicity)
        profile[len(branches)] += 1
        while len(profile) > 1 and profile[-1] == 0:
            profile.pop()
        return ClassEntry(code, aut, factorials, tuple(profile))


class EnumerationService:
    """Servicio de enumeración exacta de árboles de Pólya y oráculos de probabilidad exacta."""

    ENUMERATION_CEILING = 18
    RESTRICTED_ENUMERATION_CEILING = 21
    RESTRICTED_SUPPORT_SIZE = 3
    # Clases acumuladas (todos los niveles hasta n) que puede retener un catálogo
    CATALOG_CLASS_BUDGET = 4_000_000

    _catalogs: Dict[tuple, _Catalog] = {}
    _lock = threading.Lock()

    @staticmethod
    def _support_key(model: DegreeModel) -> tuple:
        if model.unbounded:
            excluded = tuple(k for k, w in model.weights if w == 0)
            return ("unbounded", excluded)
        return ("bounded", tuple(model.support(model.max_degree)))

    @classmethod
    def ceiling_for(cls, model: DegreeModel) -> int:
        """Techo por defecto: 21 para soportes finitos de a lo sumo 3 grados, 18 en otro caso."""
        if not model.unbounded and len(model.support(model.max_degree)) <= cls.RESTRICTED_SUPPORT_SIZE:
            return cls.RESTRICTED_ENUMERATION_CEILING
        return cls.ENUMERATION_CEILING

    @classmethod
    def _validate_size(cls, n: int, model: DegreeModel, ceiling: Optional[int]) -> None:
        if not isinstance(n, int) or n < 1:
            raise TreeError(f"El tamaño debe ser un entero positivo (recibido: {n})")
        limit = cls.ceiling_for(model) if ceiling is None else ceiling
        if n > limit:
            raise ResourceLimitError(
                f"n = {n} supera el techo de enumeración {limit} para el modelo {model.name}"
            )
        total = sum(SamplerService.polya_count(k, model) for k in range(1, n + 1))
        if total > cls.CATALOG_CLASS_BUDGET:
            raise ResourceLimitError(
                f"El catálogo hasta n = {n} tendría {total} clases (máximo {cls.CATALOG_CLASS_BUDGET})"
            )

    @classmethod
    def _entries(cls, n: int, model: DegreeModel, ceiling: Optional[int] = None) -> List[ClassEntry]:
        cls._validate_size(n, model, ceiling)
        key = cls._support_key(model)
        with cls._lock:
            catalog = cls._catalogs.get(key)
            if catalog is None:
                catalog = _Catalog(model.allows, model.max_degree)
                cls._catalogs[key] = catalog
            catalog.extend_to(n)
            return catalog.levels[n]

    @classmethod
    def clear_cache(cls) -> None:
        with cls._lock:
            cls._catalogs.clear()

    @staticmethod
    def entry_weight(entry: ClassEntry, model: DegreeModel) -> Fraction:
        """W(P) a partir del perfil de grados: prod w_d^{#d} · prod d! / |Aut|."""
        weight = Fraction(entry.factorials, entry.aut)
        for degree, count in enumerate(entry.profile):
            if count:
                weight *= model.weight(degree) ** count
        return weight

    @classmethod
    def to_record(cls, entry: ClassEntry, model: DegreeModel) -> PolyaRecord:
        return PolyaRecord(
            code=entry.code,
            n=sum(entry.profile),
            aut=entry.aut,
            pr=entry.factorials // entry.aut,
            weight=cls.entry_weight(entry, model),
            degree_profile=tuple((d, c) for d, c in enumerate(entry.profile) if c),
        )

    @classmethod
    def enumerate_polya(
        cls,
        n: int,
        model: Optional[DegreeModel] = None,
        ceiling: Optional[int] = None,
    ) -> Iterator[PolyaRecord]:
        """
        Cada clase de isomorfismo de tamaño n exactamente una vez, en orden de código.

        Raises:
            ResourceLimitError: Si n supera el techo configurado
        """
        model = model or DegreeModel.plane()
        entries = cls._entries(n, model, ceiling)
        return (cls.to_record(entry, model) for entry in entries)

    @classmethod
    def class_count(cls, n: int, model: Optional[DegreeModel] = None, ceiling: Optional[int] = None) -> int:
        return len(cls._entries(n, model or DegreeModel.plane(), ceiling))

    @classmethod
    def cayley_sum(cls, n: int, ceiling: Optional[int] = None) -> int:
        """sum_P n!/|Aut P|; debe valer n^(n-1)."""
        total = 0
        factorial = math.factorial(n)
        for entry in cls._entries(n, DegreeModel.plane(), ceiling):
            total += factorial // entry.aut
        return total

    @classmethod
    def plane_tree_count(cls, n: int, ceiling: Optional[int] = None) -> int:
        """sum_P PR(P); debe valer Catalan(n-1)."""
        return sum(entry.factorials // entry.aut for entry in cls._entries(n, DegreeModel.plane(), ceiling))

    @classmethod
    def weight_sum(cls, n: int, model: DegreeModel, ceiling: Optional[int] = None) -> Fraction:
        return sum((cls.entry_weight(e, model) for e in cls._entries(n, model, ceiling)), Fraction(0))

    @classmethod
    def squared_weight_sum(cls, n: int, model: DegreeModel, ceiling: Optional[int] = None) -> Fraction:
        return sum((cls.entry_weight(e, model) ** 2 for e in cls._entries(n, model, ceiling)), Fraction(0))

    @classmethod
    def weight_power_sum(cls, n: int, model: DegreeModel, t: int, ceiling: Optional[int] = None) -> Fraction:
        """sum_P W(P)^t: el coeficiente n de P_D(x,t)."""
        return sum((cls.entry_weight(e, model) ** t for e in cls._entries(n, model, ceiling)), Fraction(0))

    @classmethod
    def marked_class_sum(
        cls,
        n: int,
        t: int,
        degrees: Sequence[int],
        marks: Sequence[Fraction],
        ceiling: Optional[int] = None,
    ) -> Fraction:
        """sum_P prod_i u_i^{#vértices de grado d_i} / |Aut P|^t: el coeficiente n de P(x,t,u)."""
        total = Fraction(0)
        for entry in cls._entries(n, DegreeModel.plane(), ceiling):
            term = Fraction(1, entry.aut ** t)
            for degree, u in zip(degrees, marks):
                count = entry.profile[degree] if degree < len(entry.profile) else 0
                term *= Fraction(u) ** count
            total += term
        return total

    @classmethod
    def inverse_aut_power_sum(cls, n: int, t: int = 2, ceiling: Optional[int] = None) -> Fraction:
        """sum_P 1/|Aut P|^t sobre todos los árboles de Pólya de tamaño n."""
        return sum(
            (Fraction(1, entry.aut ** t) for entry in cls._entries(n, DegreeModel.plane(), ceiling)),
            Fraction(0),
        )

    @classmethod
    def exact_p_labeled(cls, n: int, ceiling: Optional[int] = None) -> Fraction:
        """
        p_n = (n!/n^(n-1))^2 · sum_P 1/|Aut P|^2.

        Raises:
            ResourceLimitError: Si n supera el techo configurado
        """
        total = cls.inverse_aut_power_sum(n, 2, ceiling)
        scale = Fraction(math.factorial(n), n ** (n - 1))
        return scale * scale * total

    @classmethod
    def exact_p_gw(cls, n: int, model: DegreeModel, ceiling: Optional[int] = None) -> Fraction:
        """
        sum W(P)^2 / (sum W(P))^2 para el Galton–Watson condicionado al tamaño n.

        Raises:
            TreeError: Si ningún árbol de tamaño n respeta el modelo
        """
        entries = cls._entries(n, model, ceiling)
        weights = [cls.entry_weight(entry, model) for entry in entries]
        total = sum(weights, Fraction(0))
        if total == 0:
            raise TreeError(f"Ningún árbol de tamaño {n} es compatible con el modelo {model.name}")
        return sum((w * w for w in weights), Fraction(0)) / (total * total)

    @staticmethod
    def rate(q: Fraction, n: int) -> float:
        """-log(q)/n sin pasar q por coma flotante."""
        return (math.log(q.denominator) - math.log(q.numerator)) / n

    @classmethod
    def plane_decay_table(
        cls,
        n_max: int,
        method: str = "enumeration",
        ceiling: Optional[int] = None,
    ) -> List[PlaneDecayRow]:
        """
        q_n = sum_P PR(P)^2 / Catalan(n-1)^2 para n = 1..n_max.

        method = "enumeration" suma sobre el catálogo; method = "series" lee los
        coeficientes exactos de la familia plana sin cota a t = 2.
        """
        plane = DegreeModel.plane()
        if method == "enumeration":
            cls._validate_size(n_max, plane, ceiling)
            squares = [cls.squared_weight_sum(n, plane, ceiling) for n in range(1, n_max + 1)]
        elif method == "series":
            if n_max < 1:
                raise TreeError(f"n_max debe ser positivo (recibido: {n_max})")
            from .equation_service import EquationService
            series = EquationService.solve_degree_series(plane, 2, n_max)
            squares = [series.coefficient(n) for n in range(1, n_max + 1)]
        else:
            raise TreeError(f"Método desconocido para la tabla de decaimiento: {method}")

        rows = []
        for n, square in enumerate(squares, start=1):
            plane_trees = math.comb(2 * (n - 1), n - 1) // n
            q = Fraction(square) / (plane_trees * plane_trees)
            rows.append(PlaneDecayRow(n=n, q=q, rate=cls.rate(q, n), plane_trees=plane_trees))
        return rows

    @staticmethod
    def _moments(values: Sequence, weights: Sequence) -> Tuple:
        total = sum(weights)
        mean = sum(w * v for w, v in zip(weights, values)) / total
        second = sum(w * v * v for w, v in zip(weights, values)) / total
        return mean, second - mean * mean

    @classmethod
    def exact_isomorphic_pair_moments(
        cls,
        n: int,
        degree: int = 0,
        ceiling: Optional[int] = None,
    ) -> ExactMoments:
        """
        Media y varianza exactas del número de vértices de grado de salida `degree`
        en un par de árboles etiquetados condicionado a ser isomorfo (peso 1/|Aut|^2).
        """
        entries = cls._entries(n, DegreeModel.plane(), ceiling)
        weights = [Fraction(1, entry.aut ** 2) for entry in entries]
        values = [entry.profile[degree] if degree < len(entry.profile) else 0 for entry in entries]
        mean, variance = cls._moments(values, weights)
        return ExactMoments(n=n, mean=mean, variance=variance, classes=len(entries))

    @classmethod
    def exact_labeled_moments(cls, n: int, degree: int = 0, ceiling: Optional[int] = None) -> ExactMoments:
        """Igual que el anterior para un único árbol etiquetado uniforme (peso 1/|Aut|)."""
        entries = cls._entries(n, DegreeModel.plane(), ceiling)
        weights = [Fraction(1, entry.aut) for entry in entries]
        values = [entry.profile[degree] if degree < len(entry.profile) else 0 for entry in entries]
        mean, variance = cls._moments(values, weights)
        return ExactMoments(n=n, mean=mean, variance=variance, classes=len(entries))

    @classmethod
    def exact_uniform_polya_moments(
        cls,
        n: int,
        statistic: MomentStatistic,
        model: Optional[DegreeModel] = None,
        ceiling: Optional[int] = None,
    ) -> ExactMoments:
        """
        Momentos de log|Aut|, log W o número de hojas bajo el árbol de Pólya uniforme
        (restringido al soporte del modelo cuando se da uno).
        """
        model = model or DegreeModel.plane()
        entries = cls._entries(n, model, ceiling)
        if not entries:
            raise TreeError(f"Ningún árbol de tamaño {n} es compatible con el modelo {model.name}")
        if statistic is MomentStatistic.LEAVES:
            values = [Fraction(entry.profile[0]) for entry in entries]
            weights = [Fraction(1)] * len(entries)
        else:
            if statistic is MomentStatistic.LOG_AUT:
                values = [math.log(entry.aut) for entry in entries]
            else:
                values = []
                for entry in entries:
                    weight = cls.entry_weight(entry, model)
                    values.append(math.log(weight.numerator) - math.log(weight.denominator))
            weights = [1.0] * len(entries)
        mean, variance = cls._moments(values, weights)
        return ExactMoments(n=n, mean=mean, variance=variance, classes=len(entries))

    @classmethod
    def isomorphic_class_law(cls, n: int, ceiling: Optional[int] = None) -> Tuple[List[ClassEntry], List[int]]:
        """Clases de tamaño n con pesos enteros proporcionales a (n!/|Aut|)^2."""
        entries = cls._entries(n, DegreeModel.plane(), ceiling)
        factorial = math.factorial(n)
        return entries, [(factorial // entry.aut) ** 2 for entry in entries]
