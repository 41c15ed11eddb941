"""FCIDUMP reader/writer and the validated integral container.

The file format: a namelist header (NORB, NELEC, MS2 required; ORBSYM and
ISYM accepted but unused) terminated by `&END` or `/`, followed by records
`value i j k l` with 1-based orbital indices. Chemist-notation two-electron
integrals (pq|rs) carry the 8-fold permutation symmetry; `value i j 0 0`
is the one-electron integral t_ij and `value 0 0 0 0` the core energy.

All energies are Hartree. Storage is dense, which is fine for the few
hundred orbitals this model targets; inputs beyond MAX_NORB are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

MAX_NORB = 512

# same canonical tuple appearing twice must agree to this before last-wins
DUPLICATE_TOL = 1e-10


class FcidumpError(ValueError):
    """Malformed FCIDUMP input. Carries the offending 1-based line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


def _eri_permutations(p, q, r, s):
    """The 8 index tuples equivalent to (pq|rs) for real orbitals."""
    return (
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    )


def canonical_eri_index(p, q, r, s):
    """Lexicographically smallest of the 8 permutations of (pq|rs)."""
    return min(_eri_permutations(p, q, r, s))


@dataclass
class IntegralSet:
    """One- and two-electron integrals of a molecule in an orthonormal basis.

    Attributes
    ----------
    norb : int
        Number of spatial orbitals.
    nelec : int
        Number of electrons.
    ms2 : int
        Twice the spin projection 2*Ms.
    core_energy : float
        Scalar energy offset (nuclear repulsion plus any frozen core), Hartree.
    one_body : (norb, norb) ndarray
        Symmetric t_pq, Hartree. Zero-based internally.
    two_body : (norb, norb, norb, norb) ndarray
        Chemist-notation h_pqrs = (pq|rs) with 8-fold symmetry, Hartree.
    orbsym : tuple of int or None
        Per-orbital symmetry labels from the header, carried as metadata.
    """

    norb: int
    nelec: int
    ms2: int
    core_energy: float = 0.0
    one_body: np.ndarray = None
    two_body: np.ndarray = None
    orbsym: tuple = None

    def __post_init__(self):
        if self.one_body is None:
            self.one_body = np.zeros((self.norb, self.norb))
        if self.two_body is None:
            self.two_body = np.zeros((self.norb,) * 4)
        self.one_body = np.asarray(self.one_body, dtype=float)
        self.two_body = np.asarray(self.two_body, dtype=float)
        self.validate()

    def validate(self):
        n = self.norb
        if not (1 <= n <= MAX_NORB):
            raise FcidumpError(f"norb={n} outside supported range [1, {MAX_NORB}]")
        if not (1 <= self.nelec <= 2 * n):
            raise FcidumpError(f"nelec={self.nelec} outside [1, {2 * n}]")
        if abs(self.ms2) > self.nelec or (self.ms2 - self.nelec) % 2 != 0:
            raise FcidumpError(f"ms2={self.ms2} incompatible with nelec={self.nelec}")
        if self.one_body.shape != (n, n):
            raise FcidumpError("one_body has wrong shape")
        if self.two_body.shape != (n, n, n, n):
            raise FcidumpError("two_body has wrong shape")
        if not (np.isfinite(self.core_energy)
                and np.all(np.isfinite(self.one_body))
                and np.all(np.isfinite(self.two_body))):
            raise FcidumpError("non-finite integral values")
        if not np.array_equal(self.one_body, self.one_body.T):
            if not np.allclose(self.one_body, self.one_body.T, atol=1e-12, rtol=0.0):
                raise FcidumpError("one_body is not symmetric")
        h = self.two_body
        for axes in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            ht = h.transpose(axes)
            if not np.array_equal(h, ht):
                if not np.allclose(h, ht, atol=1e-12, rtol=0.0):
                    raise FcidumpError("two_body lacks 8-fold permutation symmetry")

    def t(self, p, q):
        """One-electron integral with 1-based indices."""
        return self.one_body[p - 1, q - 1]

    def h(self, p, q, r, s):
        """Chemist (pq|rs) with 1-based indices."""
        return self.two_body[p - 1, q - 1, r - 1, s - 1]

    def allclose(self, other, tol=1e-14):
        return (
            self.norb == other.norb
            and self.nelec == other.nelec
            and self.ms2 == other.ms2
            and abs(self.core_energy - other.core_energy) <= tol
            and np.allclose(self.one_body, other.one_body, atol=tol, rtol=0.0)
            and np.allclose(self.two_body, other.two_body, atol=tol, rtol=0.0)
        )


_HEADER_INT = re.compile(r"^[+-]?\d+$")


def _parse_header(lines):
    """Consume the namelist header; return (fields, index of first body line).

    `lines` is the full list of raw lines. The header starts at the first
    non-blank line (expected to open with &FCI or similar) and runs until a
    terminator token `&END` or a bare `/`.
    """
    fields = {}
    start = None
    for i, raw in enumerate(lines):
        if raw.strip():
            start = i
            break
    if start is None:
        raise FcidumpError("empty input")
    first = lines[start].strip()
    if not first.startswith("&"):
        raise FcidumpError("header must start with a namelist (&FCI ...)", start + 1)

    # collect header text through the terminator, which may share a line
    buf = []
    body_start = None
    for i in range(start, len(lines)):
        text = lines[i]
        if i == start:
            text = text.strip()[1:]  # drop '&'
            # drop the namelist name token (FCI) if present
            m = re.match(r"^\s*([A-Za-z_]\w*)\s*", text)
            if m and "=" not in m.group(0):
                text = text[m.end():]
        stripped = text.strip()
        upper = stripped.upper()
        pos_end = upper.find("&END")
        pos_slash = stripped.find("/")
        if pos_end >= 0 and (pos_slash < 0 or pos_end < pos_slash):
            buf.append(stripped[:pos_end])
            body_start = i + 1
            break
        if pos_slash >= 0:
            buf.append(stripped[:pos_slash])
            body_start = i + 1
            break
        buf.append(stripped)
    if body_start is None:
        raise FcidumpError("header not terminated by &END or /")

    text = " ".join(buf)
    # split on KEY= boundaries; values may be comma- or space-separated lists
    for m in re.finditer(r"([A-Za-z_]\w*)\s*=\s*([^=]*?)(?=[,\s][A-Za-z_]\w*\s*=|$)", text):
        key = m.group(1).upper()
        val = m.group(2).strip().rstrip(",").strip()
        fields[key] = val
    return fields, body_start


def _header_int(fields, key, line_hint):
    if key not in fields:
        raise FcidumpError(f"header missing required {key}", line_hint)
    raw = fields[key].split(",")[0].strip()
    if not _HEADER_INT.match(raw):
        raise FcidumpError(f"header {key}={fields[key]!r} is not an integer", line_hint)
    return int(raw)


def parse_fcidump(text):
    """Parse FCIDUMP text into an IntegralSet.

    Raises FcidumpError (with a line number where applicable) on malformed
    headers, indices outside [1, NORB], unrecognized index patterns,
    non-numeric values, and inconsistent duplicate entries.
    """
    lines = text.splitlines()
    fields, body_start = _parse_header(lines)

    norb = _header_int(fields, "NORB", 1)
    nelec = _header_int(fields, "NELEC", 1)
    ms2 = _header_int(fields, "MS2", 1)
    if not (1 <= norb <= MAX_NORB):
        raise FcidumpError(f"NORB={norb} outside supported range [1, {MAX_NORB}]", 1)

    orbsym = None
    if "ORBSYM" in fields:
        toks = [t for t in re.split(r"[,\s]+", fields["ORBSYM"]) if t]
        try:
            orbsym = tuple(int(t) for t in toks)
        except ValueError as exc:
            raise FcidumpError(f"ORBSYM not integer-valued: {fields['ORBSYM']!r}", 1) from exc

    t = np.zeros((norb, norb))
    h = np.zeros((norb,) * 4)
    seen_t = {}
    seen_h = {}
    core = 0.0
    seen_core = None

    for lineno0 in range(body_start, len(lines)):
        lineno = lineno0 + 1
        parts = lines[lineno0].split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpError(f"expected `value i j k l`, got {len(parts)} fields", lineno)
        try:
            value = float(parts[0])
        except ValueError:
            try:
                # Fortran writers may use D exponents (1.5D-03)
                value = float(parts[0].replace("D", "E").replace("d", "e"))
            except ValueError as exc:
                raise FcidumpError(f"non-numeric value field {parts[0]!r}", lineno) from exc
        try:
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError as exc:
            raise FcidumpError(f"non-integer index in {parts[1:]}", lineno) from exc
        if not np.isfinite(value):
            raise FcidumpError(f"non-finite value {parts[0]!r}", lineno)
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FcidumpError(f"index {idx} out of range [1, {norb}]", lineno)

        if i == j == k == l == 0:
            if seen_core is not None and abs(core - value) > DUPLICATE_TOL:
                raise FcidumpError(
                    f"duplicate core energy differs: {core!r} vs {value!r}", lineno)
            core = value
            seen_core = lineno
        elif k == 0 and l == 0 and i > 0 and j > 0:
            key = (min(i, j), max(i, j))
            if key in seen_t and abs(seen_t[key] - value) > DUPLICATE_TOL:
                raise FcidumpError(
                    f"duplicate t{key} differs: {seen_t[key]!r} vs {value!r}", lineno)
            seen_t[key] = value
            t[i - 1, j - 1] = value
            t[j - 1, i - 1] = value
        elif i > 0 and j > 0 and k > 0 and l > 0:
            key = canonical_eri_index(i, j, k, l)
            if key in seen_h and abs(seen_h[key] - value) > DUPLICATE_TOL:
                raise FcidumpError(
                    f"duplicate integral {key} differs: {seen_h[key]!r} vs {value!r}", lineno)
            seen_h[key] = value
            for p, q, r, s in _eri_permutations(i, j, k, l):
                h[p - 1, q - 1, r - 1, s - 1] = value
        else:
            raise FcidumpError(f"unrecognized index pattern ({i} {j} {k} {l})", lineno)

    return IntegralSet(norb=norb, nelec=nelec, ms2=ms2, core_energy=core,
                       one_body=t, two_body=h, orbsym=orbsym)


def load_fcidump(path):
    """Read an FCIDUMP file from `path`; '-' reads standard input."""
    if path == "-":
        import sys
        return parse_fcidump(sys.stdin.read())
    with open(path) as fh:
        return parse_fcidump(fh.read())


def emit_fcidump(s):
    """Serialize an IntegralSet as canonical FCIDUMP text.

    One line per symmetry-reduced index tuple, zeros skipped, 16 decimal
    digits in scientific notation (exact float64 round trip). Two-electron
    lines come first, then one-electron, then the core energy.
    """
    out = []
    head = f" &FCI NORB={s.norb},NELEC={s.nelec},MS2={s.ms2},"
    if s.orbsym is not None:
        head += "\n  ORBSYM=" + ",".join(str(x) for x in s.orbsym) + ","
    out.append(head)
    out.append("  ISYM=1,")
    out.append(" &END")

    def fmt(value, i, j, k, l):
        return f" {value: .16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    n = s.norb
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            for r in range(1, n + 1):
                for t2 in range(1, n + 1):
                    idx = (p, q, r, t2)
                    if idx != canonical_eri_index(*idx):
                        continue
                    v = s.two_body[p - 1, q - 1, r - 1, t2 - 1]
                    if v != 0.0:
                        out.append(fmt(v, *idx))
    for p in range(1, n + 1):
        for q in range(p, n + 1):
            v = s.one_body[p - 1, q - 1]
            if v != 0.0:
                out.append(fmt(v, p, q, 0, 0))
    if s.core_energy != 0.0:
        out.append(fmt(s.core_energy, 0, 0, 0, 0))
    return "\n".join(out) + "\n"
