from __future__ import annotations

from dataclasses import dataclass


class LabelError(ValueError):
    pass


def lambda_for(size: int) -> int:
    """⌈log₂ size⌉, computed on integers."""
    return (size - 1).bit_length()


@dataclass(frozen=True)
class LabelSpace:
    L: int
    lam: int

    def __post_init__(self) -> None:
        if self.L < 2:
            raise LabelError(f"espaco de rotulos precisa de L >= 2, recebido {self.L}")
        if self.lam != lambda_for(self.L):
            raise LabelError(f"lambda {self.lam} nao corresponde a L={self.L}")

    @classmethod
    def from_size(cls, size: int) -> LabelSpace:
        if size < 2:
            raise LabelError(f"espaco de rotulos precisa de L >= 2, recebido {size}")
        return cls(size, lambda_for(size))

    def contains(self, label: int) -> bool:
        return 0 <= label < self.L


@dataclass(frozen=True)
class TransformedLabel:
    bits: tuple[int, ...]  # c_1 .. c_λ, c_1 most significant

    def __len__(self) -> int:
        return len(self.bits)

    def bit(self, index: int) -> int:
        """1-based access, matching the c_i numbering."""
        return self.bits[index - 1]

    @property
    def value(self) -> int:
        return int("".join(map(str, self.bits)), 2)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def transform(label: int, space: LabelSpace) -> TransformedLabel:
    if not space.contains(label):
        raise LabelError(f"rotulo {label} fora de [0, {space.L - 1}]")
    return TransformedLabel(tuple(int(c) for c in format(label, f"0{space.lam}b")))


def first_differing_index(a: TransformedLabel, b: TransformedLabel) -> int:
    if len(a) != len(b):
        raise LabelError("rotulos transformados com comprimentos diferentes")
    for index, (left, right) in enumerate(zip(a.bits, b.bits), start=1):
        if left != right:
            return index
    raise LabelError("rotulos iguais nao quebram simetria")


def worst_case_pair(space: LabelSpace) -> tuple[int, int]:
    """Largest pair of labels whose transformed forms differ only at bit λ."""
    base = ((space.L - 2) // 2) * 2
    return base, base + 1
