import csv
import hashlib
import json
import struct
from fractions import Fraction
from typing import BinaryIO, Iterable, List, TextIO

from ..models.catalog import CatalogMismatchError, ExportFormat
from ..models.tree import DegreeModel, PolyaRecord
from .enumeration_service import EnumerationService


class CatalogStoreService:
    """
    Caché en disco de catálogos de enumeración y exportación de registros.

    Disposición binaria (enteros sin signo, little-endian):
        cabecera: magic b"PTRC", versión u16, n u32, firma del modelo (u16 + utf-8),
                  hash SHA-256 de los pesos (32 bytes), número de registros u32
        registro: código (u32 + bytes), aut, pr, numerador y denominador del peso
                  (cada entero como u32 + bytes big-endian), perfil de grados
                  (u16 pares, cada par u32 grado + u32 cantidad)
    """

    MAGIC = b"PTRC"
    VERSION = 1
    CSV_COLUMNS = ["code_hex", "n", "aut", "pr", "weight_num", "weight_den"]

    @staticmethod
    def weight_hash(model: DegreeModel) -> bytes:
        return hashlib.sha256(model.signature.encode("utf-8")).digest()

    @staticmethod
    def _write_blob(stream: BinaryIO, blob: bytes) -> None:
        stream.write(struct.pack("<I", len(blob)))
        stream.write(blob)

    @staticmethod
    def _read_exact(stream: BinaryIO, size: int) -> bytes:
        data = stream.read(size)
        if len(data) != size:
            raise CatalogMismatchError("Archivo de catálogo truncado")
        return data

    @classmethod
    def _read_blob(cls, stream: BinaryIO) -> bytes:
        (length,) = struct.unpack("<I", cls._read_exact(stream, 4))
        return cls._read_exact(stream, length)

    @classmethod
    def _write_int(cls, stream: BinaryIO, value: int) -> None:
        cls._write_blob(stream, value.to_bytes(max(1, (value.bit_length() + 7) // 8), "big"))

    @classmethod
    def _read_int(cls, stream: BinaryIO) -> int:
        return int.from_bytes(cls._read_blob(stream), "big")

    @classmethod
    def save(cls, stream: BinaryIO, n: int, model: DegreeModel, records: List[PolyaRecord]) -> None:
        signature = model.signature.encode("utf-8")
        stream.write(cls.MAGIC)
        stream.write(struct.pack("<HIH", cls.VERSION, n, len(signature)))
        stream.write(signature)
        stream.write(cls.weight_hash(model))
        stream.write(struct.pack("<I", len(records)))
        for record in records:
            cls._write_blob(stream, record.code)
            cls._write_int(stream, record.aut)
            cls._write_int(stream, record.pr)
            cls._write_int(stream, record.weight.numerator)
            cls._write_int(stream, record.weight.denominator)
            stream.write(struct.pack("<H", len(record.degree_profile)))
            for degree, count in record.degree_profile:
                stream.write(struct.pack("<II", degree, count))

    @classmethod
    def load(cls, stream: BinaryIO, n: int, model: DegreeModel) -> List[PolyaRecord]:
        """
        Raises:
            CatalogMismatchError: Si la cabecera no coincide con (n, modelo)
        """
        if cls._read_exact(stream, 4) != cls.MAGIC:
            raise CatalogMismatchError("No es un archivo de catálogo")
        version, stored_n, signature_length = struct.unpack("<HIH", cls._read_exact(stream, 8))
        if version != cls.VERSION:
            raise CatalogMismatchError(f"Versión de catálogo no soportada: {version}")
        signature = cls._read_exact(stream, signature_length).decode("utf-8")
        digest = cls._read_exact(stream, 32)
        if stored_n != n:
            raise CatalogMismatchError(f"El catálogo es de tamaño {stored_n}, se pidió {n}")
        if signature != model.signature or digest != cls.weight_hash(model):
            raise CatalogMismatchError(f"El catálogo pertenece a otro modelo ({signature})")

        (count,) = struct.unpack("<I", cls._read_exact(stream, 4))
        records = []
        for _ in range(count):
            code = cls._read_blob(stream)
            aut = cls._read_int(stream)
            pr = cls._read_int(stream)
            weight = Fraction(cls._read_int(stream), cls._read_int(stream))
            (pairs,) = struct.unpack("<H", cls._read_exact(stream, 2))
            profile = tuple(struct.unpack("<II", cls._read_exact(stream, 8)) for _ in range(pairs))
            records.append(PolyaRecord(code, stored_n, aut, pr, weight, profile))
        return records

    @classmethod
    def load_or_build(cls, path: str, n: int, model: DegreeModel, ceiling=None) -> List[PolyaRecord]:
        """Lee el catálogo de `path` si existe y coincide; si no, enumera y lo guarda."""
        try:
            with open(path, "rb") as stream:
                return cls.load(stream, n, model)
        except (FileNotFoundError, CatalogMismatchError):
            records = list(EnumerationService.enumerate_polya(n, model, ceiling))
            with open(path, "wb") as stream:
                cls.save(stream, n, model, records)
            return records

    @classmethod
    def row(cls, record: PolyaRecord) -> dict:
        return {
            "code_hex": record.code.hex(),
            "n": record.n,
            "aut": record.aut,
            "pr": record.pr,
            "weight_num": record.weight.numerator,
            "weight_den": record.weight.denominator,
        }

    @classmethod
    def export(cls, records: Iterable[PolyaRecord], stream: TextIO, fmt: ExportFormat) -> int:
        """Escribe los registros como JSON lines o CSV; devuelve cuántos se escribieron."""
        written = 0
        if fmt is ExportFormat.CSV:
            writer = csv.DictWriter(stream, fieldnames=cls.CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for record in records:
                writer.writerow(cls.row(record))
                written += 1
        else:
            for record in records:
                stream.write(json.dumps(cls.row(record)) + "\n")
                written += 1
        return written
