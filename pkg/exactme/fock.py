"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import functools
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy import special

from .core import DataType, Statistics, hermitize
from .exceptions import InvalidInputError
from .i18n import translate

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import Final

    import numpy.typing as npt

    ComplexArray = npt.NDArray[np.complex128]


MIN_BOSON_CUTOFF: "Final" = 20
CUTOFF_PER_QUANTUM: "Final" = 10
MAX_FERMION_MODES: "Final" = 10


def default_cutoff(mean_occupation: float) -> int:
    return max(MIN_BOSON_CUTOFF, CUTOFF_PER_QUANTUM * (math.ceil(mean_occupation) + 1))


class FockBasis(DataType):
    """Truncated Fock space: one boson mode with `cutoff` quanta at most, or 2^modes fermion states."""

    statistics: Statistics
    modes: int
    cutoff: int

    @classmethod
    def boson(cls, cutoff: int) -> "FockBasis":
        if cutoff < 1:
            bad_cutoff = translate("boson cutoff must be >= 1, got {}").format(cutoff)
            raise InvalidInputError(bad_cutoff)
        return cls(statistics=Statistics.BOSON, modes=1, cutoff=cutoff)

    @classmethod
    def fermion(cls, modes: int) -> "FockBasis":
        if not 1 <= modes <= MAX_FERMION_MODES:
            bad_modes = translate("fermion modes must be between 1 and {}, got {}").format(
                MAX_FERMION_MODES, modes,
            )
            raise InvalidInputError(bad_modes)
        return cls(statistics=Statistics.FERMION, modes=modes, cutoff=1)

    @property
    def dimension(self) -> int:
        if self.statistics is Statistics.BOSON:
            return self.cutoff + 1
        return int(2 ** self.modes)

    @functools.cached_property
    def annihilators(self) -> list["ComplexArray"]:
        if self.statistics is Statistics.BOSON:
            return [np.diag(np.sqrt(np.arange(1, self.cutoff + 1)), k=1).astype(np.complex128)]
        lowering = np.array([[0, 1], [0, 0]], dtype=np.complex128)
        parity = np.diag([1, -1]).astype(np.complex128)
        identity = np.eye(2, dtype=np.complex128)
        result = []
        for mode in range(self.modes):
            operator = np.ones((1, 1), dtype=np.complex128)
            for other in range(self.modes):
                if other < mode:
                    factor = parity
                elif other == mode:
                    factor = lowering
                else:
                    factor = identity
                operator = np.kron(operator, factor)
            result.append(operator)
        return result

    @functools.cached_property
    def creators(self) -> list["ComplexArray"]:
        return [operator.conj().T for operator in self.annihilators]

    @functools.cached_property
    def normal_products(self) -> list[list["ComplexArray"]]:
        """a_i^dagger a_j."""
        return [
            [creator @ annihilator for annihilator in self.annihilators]
            for creator in self.creators
        ]

    @functools.cached_property
    def anti_normal_products(self) -> list[list["ComplexArray"]]:
        """a_j a_i^dagger, indexed [i][j]."""
        return [
            [annihilator @ creator for annihilator in self.annihilators]
            for creator in self.creators
        ]

    def quadratic(self, matrix: "ComplexArray") -> "ComplexArray":
        """sum_ij M_ij a_i^dagger a_j."""
        result = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        for row, products in enumerate(self.normal_products):
            for column, product in enumerate(products):
                if matrix[row, column]:
                    result += matrix[row, column] * product
        return result

    def check_levels(self, levels: int, statistics: Statistics) -> None:
        if statistics is not self.statistics or levels != self.modes:
            mismatch = translate(
                "basis holds {} {} mode(s), coefficients describe {} {} level(s)",
            ).format(
                self.modes, self.statistics.name.lower(), levels, statistics.name.lower(),
            )
            raise InvalidInputError(mismatch)


class DensityMatrix(DataType):
    basis: FockBasis
    matrix: "ComplexArray"

    @property
    def statistics(self) -> Statistics:
        return self.basis.statistics

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(hermitize(self.matrix))[0])

    def expectation(self, operator: "ComplexArray") -> complex:
        return complex(np.trace(self.matrix @ operator))

    def occupation(self) -> "ComplexArray":
        """M_ij = <a_i^dagger a_j>."""
        products = self.basis.normal_products
        return np.array([
            [self.expectation(product) for product in row] for row in products
        ], dtype=np.complex128)

    def top_population(self) -> float:
        if self.basis.statistics is not Statistics.BOSON:
            return 0.0
        return float(self.matrix[-1, -1].real)


def _pure(basis: FockBasis, amplitudes: "npt.NDArray[np.complex128]") -> DensityMatrix:
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return DensityMatrix(basis=basis, matrix=np.outer(amplitudes, amplitudes.conj()))


def _require_boson(basis: FockBasis) -> None:
    if basis.statistics is not Statistics.BOSON:
        not_boson = translate("this initial state needs a boson basis")
        raise InvalidInputError(not_boson)


def fock_state(basis: FockBasis, quanta: int) -> DensityMatrix:
    if not 0 <= quanta < basis.dimension:
        out_of_range = translate("Fock state {} lies outside the basis of dimension {}").format(
            quanta, basis.dimension,
        )
        raise InvalidInputError(out_of_range)
    amplitudes = np.zeros(basis.dimension, dtype=np.complex128)
    amplitudes[quanta] = 1
    return _pure(basis, amplitudes)


def coherent_state(basis: FockBasis, alpha: complex) -> DensityMatrix:
    """Coherent state truncated to the basis and renormalised."""
    _require_boson(basis)
    quanta = np.arange(basis.dimension)
    log_norms = -abs(alpha) ** 2 / 2 - special.gammaln(quanta + 1) / 2
    if alpha == 0:
        amplitudes = (quanta == 0).astype(np.complex128)
    else:
        amplitudes = np.exp(log_norms + quanta * np.log(complex(alpha)))
    return _pure(basis, amplitudes)


def thermal_state(basis: FockBasis, mean_occupation: float) -> DensityMatrix:
    _require_boson(basis)
    if mean_occupation < 0:
        negative = translate("mean occupation must be >= 0, got {}").format(mean_occupation)
        raise InvalidInputError(negative)
    quanta = np.arange(basis.dimension)
    ratio = mean_occupation / (1 + mean_occupation)
    populations = np.power(ratio, quanta) / (1 + mean_occupation)
    populations /= populations.sum()
    return DensityMatrix(basis=basis, matrix=np.diag(populations).astype(np.complex128))


def occupation_state(basis: FockBasis, occupations: "Sequence[float]") -> DensityMatrix:
    """Product of diag(1 - n_j, n_j) over fermion modes; mode 0 is the leading tensor factor."""
    if basis.statistics is not Statistics.FERMION:
        not_fermion = translate("occupation states need a fermion basis")
        raise InvalidInputError(not_fermion)
    if len(occupations) != basis.modes or any(not 0 <= value <= 1 for value in occupations):
        bad_occupations = translate("need {} occupations in [0, 1], got {}").format(
            basis.modes, list(occupations),
        )
        raise InvalidInputError(bad_occupations)
    diagonal = np.ones(1)
    for value in occupations:
        diagonal = np.kron(diagonal, [1 - value, value])
    return DensityMatrix(basis=basis, matrix=np.diag(diagonal).astype(np.complex128))
