"""Rotation algebra on the Bloch sphere.

A `Rotation` is stored as a unit quaternion ``(w, x, y, z)``. The SO(3)
matrix acting on Bloch vectors is a derived view, as is the 2x2 unitary.
Composition follows operator order: ``compose(a, b)`` applies ``b`` first,
then ``a``.

A positive angle rotates right-handedly about its axis:

>>> np.round(X90.matrix @ (0, 1, 0), 12) + 0
array([0., 0., 1.])

``q`` and ``-q`` describe the same rotation. Equality and distance ignore
the sign:

>>> Rotation(-1, 0, 0, 0) == I
True
"""
from __future__ import annotations

import math
from typing import NamedTuple, Tuple

import numpy as np

QuatTuple = Tuple[float, float, float, float]

TWO_PI = 2.0 * math.pi

# used for equality and for cleaning up round-off in table lookups
EPSILON = 1e-12


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion arrays, broadcasting over leading axes."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack(
        (
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ),
        axis=-1,
    )


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """SO(3) matrices for (a stack of) unit quaternions."""
    w, x, y, z = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack(
        (
            np.stack(
                (1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)),
                axis=-1,
            ),
            np.stack(
                (2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)),
                axis=-1,
            ),
            np.stack(
                (2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)),
                axis=-1,
            ),
        ),
        axis=-2,
    )


def equatorial_quats(phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Quaternions for rotations by `theta` about equatorial axes `phi`."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta / 2)
    return np.stack(
        (np.cos(theta / 2), s * np.cos(phi), s * np.sin(phi), np.zeros_like(s)),
        axis=-1,
    )


class Rotation:
    """A rotation of the Bloch sphere.

    The quaternion is normalized on construction, so every operation that
    builds a new rotation keeps ``|q| = 1``.

    >>> Rotation(2, 0, 0, 0)
    Rotation(1, 0, 0, 0)
    """

    __slots__ = ("_q",)

    def __init__(self, w: float, x: float, y: float, z: float) -> None:
        q = np.array((w, x, y, z), dtype=float)
        norm = np.linalg.norm(q)
        if not norm > 0:
            raise ValueError("A rotation needs a non-zero quaternion")
        q /= norm
        q.flags.writeable = False
        self._q = q

    @classmethod
    def from_quat(cls, q: np.ndarray) -> Rotation:
        return cls(*(float(c) for c in q))

    @property
    def q(self) -> np.ndarray:
        """The unit quaternion ``(w, x, y, z)`` (read-only)."""
        return self._q

    def canonical(self) -> QuatTuple:
        """Quaternion with the sign fixed: first non-zero component positive."""
        q = self._q
        for c in q:
            if abs(c) > EPSILON:
                if c < 0:
                    q = -q
                break
        return tuple(float(c) for c in q)  # type: ignore[return-value]

    @property
    def matrix(self) -> np.ndarray:
        """SO(3) view: the 3x3 matrix acting on Bloch vectors."""
        return quat_to_matrix(self._q)

    @property
    def su2(self) -> np.ndarray:
        """2x2 unitary ``w I - i (x X + y Y + z Z)``."""
        w, x, y, z = self._q
        return np.array(
            [[w - 1j * z, -1j * x - y], [-1j * x + y, w + 1j * z]], dtype=complex
        )

    def inverse(self) -> Rotation:
        w, x, y, z = self._q
        return Rotation(w, -x, -y, -z)

    def axis_angle(self) -> Tuple[np.ndarray, float]:
        """Rotation axis (unit vector) and angle in ``[0, pi]``.

        >>> axis, angle = X180.axis_angle()
        >>> axis, round(angle, 6)
        (array([1., 0., 0.]), 3.141593)
        """
        w, x, y, z = self.canonical()
        v = np.array((x, y, z))
        s = float(np.linalg.norm(v))
        if s < EPSILON:
            return np.array((0.0, 0.0, 1.0)), 0.0
        return v / s, 2.0 * math.atan2(s, abs(w))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Rotation):
            return NotImplemented
        d = min(
            np.linalg.norm(self._q - other._q), np.linalg.norm(self._q + other._q)
        )
        return bool(d < 1e-9)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return "Rotation({:g}, {:g}, {:g}, {:g})".format(*self.canonical())


class TargetGate(NamedTuple):
    """A target single-qubit gate ``(theta, phi, delta)``.

    The unitary is::

        [[ e^{i delta} cos(theta/2),  -i e^{-i phi} sin(theta/2)],
         [-i e^{i phi} sin(theta/2),   e^{-i delta} cos(theta/2)]]

    With ``delta = 0`` this is a rotation by `theta` about the equatorial
    axis at azimuth `phi`. A non-zero `delta` folds a z rotation in.
    """

    theta: float
    phi: float = 0.0
    delta: float = 0.0

    def rotation(self) -> Rotation:
        c = math.cos(self.theta / 2)
        s = math.sin(self.theta / 2)
        return Rotation(
            c * math.cos(self.delta),
            s * math.cos(self.phi),
            s * math.sin(self.phi),
            -c * math.sin(self.delta),
        )

    @classmethod
    def from_rotation(cls, rotation: Rotation) -> TargetGate:
        """Recover ``(theta, phi, delta)`` with ``theta`` in ``[0, pi]``.

        At ``theta = 0`` the azimuth is undefined and reported as 0; at
        ``theta = pi`` the same holds for ``delta``. The quaternion sign is
        fixed first, so ``delta`` comes out in ``[0, pi/2] U [3pi/2, 2pi)``.
        """
        w, x, y, z = rotation.canonical()
        c = math.hypot(w, z)
        s = math.hypot(x, y)
        theta = 2.0 * math.atan2(s, c)
        phi = math.atan2(y, x) % TWO_PI if s > EPSILON else 0.0
        delta = math.atan2(-z, w) % TWO_PI if c > EPSILON else 0.0
        return cls(theta, phi, delta)

    def canonical(self) -> TargetGate:
        """The same gate with ``theta`` in ``[0, pi]`` and angles in ``[0, 2pi)``."""
        return TargetGate.from_rotation(self.rotation())


def rot_from_axis_angle(phi: float, theta: float) -> Rotation:
    """Rotation by `theta` about the equatorial axis ``(cos phi, sin phi, 0)``.

    >>> rot_from_axis_angle(0, 0) == I
    True
    >>> np.round(rot_from_axis_angle(0, math.pi).matrix, 12) + 0
    array([[ 1.,  0.,  0.],
           [ 0., -1.,  0.],
           [ 0.,  0., -1.]])
    """
    return Rotation.from_quat(equatorial_quats(phi, theta))


def rz(angle: float) -> Rotation:
    """Rotation by `angle` about the z axis."""
    return Rotation(math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2))


def compose(a: Rotation, b: Rotation) -> Rotation:
    """Apply `b` first, then `a`.

    >>> compose(X90, X90) == X180
    True
    """
    return Rotation.from_quat(quat_multiply(a.q, b.q))


def distance_hs(a: Rotation, b: Rotation) -> float:
    """Hilbert-Schmidt (Frobenius) norm of the SO(3) matrix difference.

    >>> round(distance_hs(I, X180), 4)
    2.8284
    """
    return float(np.linalg.norm(a.matrix - b.matrix))


I = Rotation(1.0, 0.0, 0.0, 0.0)  # noqa: E741
X90 = rot_from_axis_angle(0.0, math.pi / 2)
XM90 = rot_from_axis_angle(math.pi, math.pi / 2)
Y90 = rot_from_axis_angle(math.pi / 2, math.pi / 2)
YM90 = rot_from_axis_angle(3 * math.pi / 2, math.pi / 2)
X180 = rot_from_axis_angle(0.0, math.pi)
Y180 = rot_from_axis_angle(math.pi / 2, math.pi)
Z180 = rz(math.pi)
