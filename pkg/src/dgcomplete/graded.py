"""Bigraded spaces and cochain complexes inside a truncation window.

Basis keys are triples (degree, weight, index).  Elements are sparse dicts
mapping keys to scalars.  Every space tracks which (degree, weight) cells are
fully known: a "complete" weight column means the stored cells are all there
is at that weight, a partial column carries a known degree interval, and
anything else is unknown.  Certificates for cohomology are derived from that
knowledge: a bidegree is exact only when the cells at degrees d-1, d, d+1 of
its weight are fully known.
"""
from __future__ import annotations

from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .linalg import Echelon, Field, Scalar, SparseMatrix

Key = Tuple[int, int, int]  # (degree, weight, index)
Elt = Dict[Key, Scalar]

EXACT = "exact"
WINDOW_LIMITED = "window-limited"


class Window:
    """Truncation window: degrees dmin..dmax, weights |w| <= wmax."""

    __slots__ = ("dmin", "dmax", "wmax")

    def __init__(self, dmin: int, dmax: int, wmax: int):
        if dmin > dmax or wmax < 0:
            raise ValueError(f"bad window ({dmin},{dmax},{wmax})")
        self.dmin = dmin
        self.dmax = dmax
        self.wmax = wmax

    def contains(self, deg: int, wt: int) -> bool:
        return self.dmin <= deg <= self.dmax and abs(wt) <= self.wmax

    def degrees(self) -> range:
        return range(self.dmin, self.dmax + 1)

    def weights(self) -> range:
        return range(-self.wmax, self.wmax + 1)

    def grid(self):
        for d in self.degrees():
            for w in self.weights():
                yield (d, w)

    def __eq__(self, other):
        return (isinstance(other, Window) and (self.dmin, self.dmax, self.wmax)
                == (other.dmin, other.dmax, other.wmax))

    def __repr__(self):
        return f"Window({self.dmin}, {self.dmax}, wmax={self.wmax})"


def _in_interval(d: int, lo: Optional[int], hi: Optional[int]) -> bool:
    return (lo is None or d >= lo) and (hi is None or d <= hi)


class BiGradedSpace:
    """Finite-dimensional cells indexed by (degree, weight) with ordered labels."""

    def __init__(self, field: Field):
        self.field = field
        self.cells: Dict[Tuple[int, int], List] = {}
        self._index: Dict[Tuple[int, int], Dict] = {}
        # weight -> (lo, hi) known degree interval, None meaning unbounded.
        # Weights absent from known_cols: known zero if zero_outside, else unknown.
        self.known_cols: Dict[int, Tuple[Optional[int], Optional[int]]] = {}
        self.zero_outside = True
        # certified empty rays: every weight strictly below known_zero_below
        # (resp. strictly above known_zero_above) has no cells at any cap
        self.known_zero_below: Optional[int] = None
        self.known_zero_above: Optional[int] = None

    def add_cell(self, deg: int, wt: int, labels: Sequence) -> None:
        if (deg, wt) in self.cells:
            raise ValueError(f"duplicate cell ({deg},{wt})")
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"repeated labels in cell ({deg},{wt})")
        if labels:
            self.cells[(deg, wt)] = labels
            self._index[(deg, wt)] = {lbl: i for i, lbl in enumerate(labels)}

    def dim(self, deg: int, wt: int) -> int:
        return len(self.cells.get((deg, wt), ()))

    def labels(self, deg: int, wt: int) -> List:
        return self.cells.get((deg, wt), [])

    def keys(self, deg: int, wt: int) -> List[Key]:
        return [(deg, wt, i) for i in range(self.dim(deg, wt))]

    def key_of(self, deg: int, wt: int, label) -> Key:
        return (deg, wt, self._index[(deg, wt)][label])

    def label_of(self, key: Key):
        return self.cells[(key[0], key[1])][key[2]]

    def sorted_cells(self) -> List[Tuple[int, int]]:
        return sorted(self.cells)

    def weights(self) -> List[int]:
        return sorted({w for (_, w) in self.cells})

    def total_dim(self) -> int:
        return sum(len(v) for v in self.cells.values())

    # -- knowledge tracking ------------------------------------------------

    def mark_all_complete(self) -> None:
        self.known_cols = {w: (None, None) for w in self.weights()}
        self.zero_outside = True

    def set_known(self, wt: int, lo: Optional[int] = None, hi: Optional[int] = None) -> None:
        self.known_cols[wt] = (lo, hi)

    def _ray_known(self, wt: int) -> bool:
        below = self.known_zero_below is not None and wt < self.known_zero_below
        above = self.known_zero_above is not None and wt > self.known_zero_above
        if not (below or above):
            return False
        return all(w != wt for (_, w) in self.cells)

    def known_at(self, deg: int, wt: int) -> bool:
        iv = self.known_cols.get(wt)
        if iv is not None and _in_interval(deg, iv[0], iv[1]):
            return True
        if self._ray_known(wt):
            return True
        if iv is not None:
            return False
        return self.zero_outside

    def column_complete(self, wt: int) -> bool:
        iv = self.known_cols.get(wt)
        if iv == (None, None):
            return True
        if self._ray_known(wt):
            return True
        if iv is not None:
            return False
        return self.zero_outside

    def fully_known(self) -> bool:
        return self.zero_outside and all(
            self.column_complete(w) for w in self.weights())

    def copy_knowledge_from(self, other: "BiGradedSpace", deg_offset: int = 0) -> None:
        self.zero_outside = other.zero_outside
        self.known_zero_below = other.known_zero_below
        self.known_zero_above = other.known_zero_above
        self.known_cols = {}
        for w, (lo, hi) in other.known_cols.items():
            self.known_cols[w] = (None if lo is None else lo - deg_offset,
                                  None if hi is None else hi - deg_offset)


def meet_knowledge(space: BiGradedSpace,
                   parts: Sequence[Tuple[BiGradedSpace, int]]) -> None:
    """Set space's knowledge to: known at (d,w) iff every (part, off) knows (d+off, w)."""
    space.zero_outside = all(p.zero_outside for p, _ in parts)
    cols: Dict[int, Tuple[Optional[int], Optional[int]]] = {}
    weights = set()
    for p, _ in parts:
        weights.update(p.known_cols)
    for w in weights:
        lo: Optional[int] = None
        hi: Optional[int] = None
        ok = True
        for p, off in parts:
            if p._ray_known(w):
                continue
            iv = p.known_cols.get(w)
            if iv is None:
                if not p.zero_outside:
                    ok = False
                    break
                continue
            plo, phi = iv
            if plo is not None:
                cand = plo - off
                lo = cand if lo is None else max(lo, cand)
            if phi is not None:
                cand = phi - off
                hi = cand if hi is None else min(hi, cand)
        if ok and (lo is None or hi is None or lo <= hi):
            cols[w] = (lo, hi)
    space.known_cols = cols
    lows = [p.known_zero_below for p, _ in parts]
    space.known_zero_below = (
        min(lows) if lows and all(b is not None for b in lows) else None)
    highs = [p.known_zero_above for p, _ in parts]
    space.known_zero_above = (
        max(highs) if highs and all(b is not None for b in highs) else None)


# -- element helpers -------------------------------------------------------

def elt_add(field: Field, a: Elt, b: Elt) -> Elt:
    out = dict(a)
    for k, v in b.items():
        s = field.add(out.get(k, field.zero), v)
        if field.is_zero(s):
            out.pop(k, None)
        else:
            out[k] = s
    return out

def elt_sub(field: Field, a: Elt, b: Elt) -> Elt:
    return elt_add(field, a, elt_scale(field, field.of(-1), b))

def elt_scale(field: Field, s: Scalar, a: Elt) -> Elt:
    if field.is_zero(s):
        return {}
    return {k: field.mul(s, v) for k, v in a.items()}

def elt_axpy(field: Field, acc: Elt, s: Scalar, a: Elt) -> None:
    """In-place acc += s * a."""
    if field.is_zero(s):
        return
    for k, v in a.items():
        t = field.add(acc.get(k, field.zero), field.mul(s, v))
        if field.is_zero(t):
            acc.pop(k, None)
        else:
            acc[k] = t

def elt_degree(a: Elt) -> Optional[int]:
    degs = {k[0] for k in a}
    if len(degs) > 1:
        raise ValueError(f"element not homogeneous in degree: {sorted(degs)}")
    return degs.pop() if degs else None


class GradedMap:
    """Map of bigraded spaces with fixed degree/weight shift, stored blockwise.

    Blocks are keyed by the source cell (deg, wt); the block matrix has one
    column per source label and one row per target label at
    (deg + deg_shift, wt + wt_shift).  Missing blocks are zero.
    """

    def __init__(self, source: BiGradedSpace, target: BiGradedSpace,
                 deg_shift: int = 0, wt_shift: int = 0):
        self.source = source
        self.target = target
        self.deg_shift = deg_shift
        self.wt_shift = wt_shift
        self.blocks: Dict[Tuple[int, int], SparseMatrix] = {}

    def target_cell(self, deg: int, wt: int) -> Tuple[int, int]:
        return (deg + self.deg_shift, wt + self.wt_shift)

    def block_at(self, deg: int, wt: int) -> Optional[SparseMatrix]:
        return self.blocks.get((deg, wt))

    def ensure_block(self, deg: int, wt: int) -> SparseMatrix:
        b = self.blocks.get((deg, wt))
        if b is None:
            td, tw = self.target_cell(deg, wt)
            b = SparseMatrix(self.target.dim(td, tw), self.source.dim(deg, wt),
                             self.source.field)
            self.blocks[(deg, wt)] = b
        return b

    def set_entry(self, src_key: Key, tgt_key: Key, value) -> None:
        d, w, i = src_key
        td, tw, j = tgt_key
        if (td, tw) != self.target_cell(d, w):
            raise ValueError(f"target key {tgt_key} inconsistent with shift from {src_key}")
        self.ensure_block(d, w)[j, i] = value

    def add_entry(self, src_key: Key, tgt_key: Key, value) -> None:
        d, w, i = src_key
        td, tw, j = tgt_key
        if (td, tw) != self.target_cell(d, w):
            raise ValueError(f"target key {tgt_key} inconsistent with shift from {src_key}")
        self.ensure_block(d, w).add_to(j, i, value)

    def set_column(self, src_key: Key, value: Elt) -> None:
        d, w, i = src_key
        td, tw = self.target_cell(d, w)
        b = self.ensure_block(d, w)
        for (kd, kw, j), v in value.items():
            if (kd, kw) != (td, tw):
                raise ValueError(f"column value off-cell: {(kd, kw)} vs {(td, tw)}")
            b[j, i] = v

    def entry(self, src_key: Key, tgt_key: Key) -> Scalar:
        b = self.blocks.get((src_key[0], src_key[1]))
        if b is None:
            return self.source.field.zero
        return b[tgt_key[2], src_key[2]]

    def column(self, src_key: Key) -> Elt:
        d, w, i = src_key
        b = self.blocks.get((d, w))
        if b is None:
            return {}
        td, tw = self.target_cell(d, w)
        return {(td, tw, r): v for (r, c), v in b.entries.items() if c == i}

    def apply(self, elt: Elt) -> Elt:
        f = self.source.field
        by_cell: Dict[Tuple[int, int], Dict[int, Scalar]] = {}
        for (d, w, i), v in elt.items():
            by_cell.setdefault((d, w), {})[i] = v
        out: Elt = {}
        for (d, w), vec in by_cell.items():
            b = self.blocks.get((d, w))
            if b is None:
                continue
            td, tw = self.target_cell(d, w)
            for r, v in b.apply(vec).items():
                key = (td, tw, r)
                s = f.add(out.get(key, f.zero), v)
                if f.is_zero(s):
                    out.pop(key, None)
                else:
                    out[key] = s
        return out

    def compose(self, other: "GradedMap") -> "GradedMap":
        """self after other."""
        out = GradedMap(other.source, self.target,
                        self.deg_shift + other.deg_shift,
                        self.wt_shift + other.wt_shift)
        for (d, w), ob in other.blocks.items():
            sb = self.blocks.get(other.target_cell(d, w))
            if sb is None:
                continue
            prod = sb.mul(ob)
            if not prod.is_zero():
                out.blocks[(d, w)] = prod
        return out

    def add(self, other: "GradedMap") -> "GradedMap":
        if (self.deg_shift, self.wt_shift) != (other.deg_shift, other.wt_shift):
            raise ValueError("shift mismatch in add")
        out = GradedMap(self.source, self.target, self.deg_shift, self.wt_shift)
        for key, b in self.blocks.items():
            out.blocks[key] = SparseMatrix(b.rows, b.cols, b.field, dict(b.entries))
        for key, b in other.blocks.items():
            if key in out.blocks:
                s = out.blocks[key].add(b)
                if s.is_zero():
                    del out.blocks[key]
                else:
                    out.blocks[key] = s
            else:
                out.blocks[key] = SparseMatrix(b.rows, b.cols, b.field, dict(b.entries))
        return out

    def scale(self, s) -> "GradedMap":
        out = GradedMap(self.source, self.target, self.deg_shift, self.wt_shift)
        s = self.source.field.of(s)
        if self.source.field.is_zero(s):
            return out
        for key, b in self.blocks.items():
            out.blocks[key] = b.scale(s)
        return out

    def neg(self) -> "GradedMap":
        return self.scale(-1)

    def sub(self, other: "GradedMap") -> "GradedMap":
        return self.add(other.neg())

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.blocks.values())

    def first_nonzero_cell(self) -> Optional[Tuple[int, int]]:
        for key in sorted(self.blocks):
            if not self.blocks[key].is_zero():
                return key
        return None

    def same_blocks(self, other: "GradedMap") -> bool:
        return ((self.deg_shift, self.wt_shift) == (other.deg_shift, other.wt_shift)
                and self.sub(other).is_zero())


class Certificate:
    """Per-bidegree exactness flags: True = exact, False = window-limited."""

    def __init__(self):
        self.status: Dict[Tuple[int, int], bool] = {}

    def set_at(self, deg: int, wt: int, exact: bool) -> None:
        self.status[(deg, wt)] = exact

    def exact_at(self, deg: int, wt: int) -> bool:
        return self.status.get((deg, wt), False)

    def text_at(self, deg: int, wt: int) -> str:
        return EXACT if self.exact_at(deg, wt) else WINDOW_LIMITED

    def meet(self, other: "Certificate") -> "Certificate":
        out = Certificate()
        for key in set(self.status) | set(other.status):
            out.status[key] = self.status.get(key, False) and other.status.get(key, False)
        return out

    def all_exact(self) -> bool:
        return all(self.status.values())


class Cohomology:
    """Cohomology of a complex: dimensions, representatives, certificate."""

    def __init__(self, space: BiGradedSpace, certificate: Certificate,
                 representatives: Dict[Key, Elt]):
        self.space = space
        self.certificate = certificate
        self.representatives = representatives

    def dim(self, deg: int, wt: int) -> int:
        return self.space.dim(deg, wt)

    def dims_by_cell(self) -> Dict[Tuple[int, int], int]:
        return {cell: len(lbls) for cell, lbls in sorted(self.space.cells.items())}


class CochainComplex:
    """A bigraded space with a degree +1, weight 0 differential."""

    def __init__(self, space: BiGradedSpace, differential: Optional[GradedMap] = None):
        self.space = space
        if differential is None:
            differential = GradedMap(space, space, 1, 0)
        if (differential.deg_shift, differential.wt_shift) != (1, 0):
            raise ValueError("differential must have degree +1, weight 0")
        self.d = differential

    @property
    def field(self) -> Field:
        return self.space.field

    def validate_d2(self) -> Optional[Tuple[int, int]]:
        """First source cell where d∘d is nonzero, or None."""
        dd = self.d.compose(self.d)
        return dd.first_nonzero_cell()

    def differential_block(self, deg: int, wt: int) -> SparseMatrix:
        b = self.d.block_at(deg, wt)
        if b is not None:
            return b
        return SparseMatrix(self.space.dim(deg + 1, wt), self.space.dim(deg, wt),
                            self.field)

    def cohomology(self, window: Optional[Window] = None) -> Cohomology:
        f = self.field
        hspace = BiGradedSpace(f)
        cert = Certificate()
        reps: Dict[Key, Elt] = {}
        probe = set(self.space.cells)
        if window is not None:
            probe.update(window.grid())
        for (d, w) in sorted(probe):
            n = self.space.dim(d, w)
            exact = (self.space.known_at(d - 1, w) and self.space.known_at(d, w)
                     and self.space.known_at(d + 1, w))
            cert.set_at(d, w, exact)
            if n == 0:
                continue
            ker = self.differential_block(d, w).kernel_basis()
            img_mat = self.differential_block(d - 1, w)
            # echelon of image vectors, then keep kernel vectors that enlarge
            # the span; those are the representatives
            ech = Echelon(f)
            img_cols: Dict[int, Dict[int, Scalar]] = {}
            for (r, c), v in img_mat.entries.items():
                img_cols.setdefault(c, {})[r] = v
            for c in sorted(img_cols):
                ech.insert(img_cols[c])
            chosen = [v for v in ker if ech.insert(v)]
            if chosen:
                hspace.add_cell(d, w, [f"h{i}" for i in range(len(chosen))])
                for i, v in enumerate(chosen):
                    reps[(d, w, i)] = {(d, w, c): x for c, x in sorted(v.items())}
        # cohomology knowledge mirrors the complex's
        hspace.zero_outside = self.space.zero_outside
        hspace.known_cols = {
            w: (None if lo is None else lo + 1, None if hi is None else hi - 1)
            for w, (lo, hi) in self.space.known_cols.items()
        }
        return Cohomology(hspace, cert, reps)

    def shift(self, n: int) -> "CochainComplex":
        """c[n]: degree d piece = c's degree d+n piece; differential times (-1)^n."""
        f = self.field
        sp = BiGradedSpace(f)
        for (d, w), lbls in self.space.cells.items():
            sp.add_cell(d - n, w, lbls)
        sp.copy_knowledge_from(self.space, deg_offset=n)
        dd = GradedMap(sp, sp, 1, 0)
        sign = f.of(1 if n % 2 == 0 else -1)
        for (d, w), b in self.d.blocks.items():
            if not b.is_zero():
                dd.blocks[(d - n, w)] = b.scale(sign)
        return CochainComplex(sp, dd)

    def direct_sum(self, other: "CochainComplex") -> "CochainComplex":
        f = self.field
        sp = BiGradedSpace(f)
        cells = sorted(set(self.space.cells) | set(other.space.cells))
        for (d, w) in cells:
            lbls = ([("L", l) for l in self.space.labels(d, w)]
                    + [("R", l) for l in other.space.labels(d, w)])
            sp.add_cell(d, w, lbls)
        meet_knowledge(sp, [(self.space, 0), (other.space, 0)])
        dd = GradedMap(sp, sp, 1, 0)
        for tag, part in (("L", self), ("R", other)):
            for (d, w), b in part.d.blocks.items():
                for (r, c), v in b.entries.items():
                    sk = sp.key_of(d, w, (tag, part.space.labels(d, w)[c]))
                    tk = sp.key_of(d + 1, w, (tag, part.space.labels(d + 1, w)[r]))
                    dd.add_entry(sk, tk, v)
        return CochainComplex(sp, dd)


def induced_rank(f: GradedMap, src: "CochainComplex", tgt: "CochainComplex",
                 deg: int, wt: int) -> int:
    """Rank of the map a chain map induces on cohomology at (deg, wt)."""
    fld = src.field
    ker = src.differential_block(deg, wt).kernel_basis()
    if not ker:
        return 0
    td, tw = deg + f.deg_shift, wt + f.wt_shift
    ech = Echelon(fld)
    prior = tgt.differential_block(td - 1, tw)
    cols: Dict[int, Dict[int, Scalar]] = {}
    for (r, c), v in prior.entries.items():
        cols.setdefault(c, {})[r] = v
    for c in sorted(cols):
        ech.insert(cols[c])
    rank = 0
    for v in ker:
        img = f.apply({(deg, wt, i): s for i, s in v.items()})
        if ech.insert({k[2]: s for k, s in img.items()}):
            rank += 1
    return rank


def is_chain_map(f: GradedMap, d_src: GradedMap, d_tgt: GradedMap) -> Optional[Tuple[int, int]]:
    """First cell where d∘f - (-1)^{deg f} f∘d fails, or None if a chain map."""
    sign = f.source.field.of(1 if f.deg_shift % 2 == 0 else -1)
    delta = d_tgt.compose(f).sub(f.compose(d_src).scale(sign))
    return delta.first_nonzero_cell()


def cone(f: GradedMap, src: CochainComplex, tgt: CochainComplex) -> CochainComplex:
    """Mapping cone of a degree-0, weight-0 chain map f: src -> tgt.

    cone^d = src^{d+1} ⊕ tgt^d with d(a, b) = (-d a, f(a) + d b).
    """
    if (f.deg_shift, f.wt_shift) != (0, 0):
        raise ValueError("cone expects a degree-0, weight-0 map")
    bad = is_chain_map(f, src.d, tgt.d)
    if bad is not None:
        raise ValueError(f"not a chain map at cell {bad}")
    fld = src.field
    sp = BiGradedSpace(fld)
    cells = sorted({(d - 1, w) for (d, w) in src.space.cells} | set(tgt.space.cells))
    for (d, w) in cells:
        lbls = ([("A", l) for l in src.space.labels(d + 1, w)]
                + [("B", l) for l in tgt.space.labels(d, w)])
        sp.add_cell(d, w, lbls)
    meet_knowledge(sp, [(src.space, 1), (tgt.space, 0)])
    dd = GradedMap(sp, sp, 1, 0)
    minus = fld.of(-1)
    for (d, w) in cells:
        for l in src.space.labels(d + 1, w):
            sk = sp.key_of(d, w, ("A", l))
            akey = src.space.key_of(d + 1, w, l)
            for tk, v in src.d.column(akey).items():
                dd.add_entry(sk, sp.key_of(d + 1, w, ("A", src.space.label_of(tk))),
                             fld.mul(minus, v))
            for tk, v in f.column(akey).items():
                dd.add_entry(sk, sp.key_of(d + 1, w, ("B", tgt.space.label_of(tk))), v)
        for l in tgt.space.labels(d, w):
            sk = sp.key_of(d, w, ("B", l))
            for tk, v in tgt.d.column(tgt.space.key_of(d, w, l)).items():
                dd.add_entry(sk, sp.key_of(d + 1, w, ("B", tgt.space.label_of(tk))), v)
    return CochainComplex(sp, dd)


class TensorComplex(CochainComplex):
    """Tensor product with the Koszul differential; remembers its factors."""

    def __init__(self, a: CochainComplex, b: CochainComplex):
        fld = a.field
        sp = BiGradedSpace(fld)
        pairs: Dict[Tuple[int, int], List[Tuple[Key, Key]]] = {}
        for (da, wa) in a.space.sorted_cells():
            for (db, wb) in b.space.sorted_cells():
                cell = (da + db, wa + wb)
                for ka in a.space.keys(da, wa):
                    for kb in b.space.keys(db, wb):
                        pairs.setdefault(cell, []).append((ka, kb))
        for cell, lst in sorted(pairs.items()):
            sp.add_cell(cell[0], cell[1],
                        [(ka, kb) for (ka, kb) in lst])
        self._tensor_knowledge(sp, a.space, b.space)
        dd = GradedMap(sp, sp, 1, 0)
        for cell, lst in pairs.items():
            for (ka, kb) in lst:
                sk = sp.key_of(cell[0], cell[1], (ka, kb))
                for tk, v in a.d.column(ka).items():
                    dd.add_entry(sk, sp.key_of(cell[0] + 1, cell[1], (tk, kb)), v)
                sign = fld.of(1 if ka[0] % 2 == 0 else -1)
                for tk, v in b.d.column(kb).items():
                    dd.add_entry(sk, sp.key_of(cell[0] + 1, cell[1], (ka, tk)),
                                 fld.mul(sign, v))
        super().__init__(sp, dd)
        self.factor_left = a
        self.factor_right = b

    @staticmethod
    def _tensor_knowledge(sp: BiGradedSpace, a: BiGradedSpace, b: BiGradedSpace) -> None:
        # precise only when both factors are fully known everywhere;
        # constructions needing sharper certificates set knowledge themselves
        if (a.zero_outside and b.zero_outside
                and all(iv == (None, None) for iv in a.known_cols.values())
                and all(iv == (None, None) for iv in b.known_cols.values())):
            sp.mark_all_complete()
        else:
            sp.zero_outside = False
            sp.known_cols = {}

    def pair_key(self, ka: Key, kb: Key) -> Key:
        return self.space.key_of(ka[0] + kb[0], ka[1] + kb[1], (ka, kb))


class HomComplex(CochainComplex):
    """Hom complex: degree-d weight-w piece = maps shifting by (d, w).

    Differential f ↦ d∘f - (-1)^{|f|} f∘d.  Remembers source and target so
    homogeneous elements convert to GradedMaps and back.
    """

    def __init__(self, a: CochainComplex, b: CochainComplex):
        fld = a.field
        sp = BiGradedSpace(fld)
        cells: Dict[Tuple[int, int], List[Tuple[Key, Key]]] = {}
        for (da, wa) in a.space.sorted_cells():
            for (db, wb) in b.space.sorted_cells():
                cell = (db - da, wb - wa)
                for ka in a.space.keys(da, wa):
                    for kb in b.space.keys(db, wb):
                        cells.setdefault(cell, []).append((ka, kb))
        for cell, lst in sorted(cells.items()):
            sp.add_cell(cell[0], cell[1], lst)
        if (a.space.zero_outside and b.space.zero_outside
                and all(iv == (None, None) for iv in a.space.known_cols.values())
                and all(iv == (None, None) for iv in b.space.known_cols.values())):
            sp.mark_all_complete()
        else:
            sp.zero_outside = False
            sp.known_cols = {}
        dd = GradedMap(sp, sp, 1, 0)
        for cell, lst in cells.items():
            for (ka, kb) in lst:
                sk = sp.key_of(cell[0], cell[1], (ka, kb))
                # first term d∘f: postcompose the target differential
                for tk, v in b.d.column(kb).items():
                    dd.add_entry(sk, sp.key_of(cell[0] + 1, cell[1], (ka, tk)), v)
        # second term -(-1)^{|f|} f∘d: for each hom basis element (ka, kb) and
        # each a-basis x with d(x) hitting ka, f∘d has a component at (x, kb)
        for cell, lst in cells.items():
            deg = cell[0]
            sign = fld.of(-1 if deg % 2 == 0 else 1)
            for (ka, kb) in lst:
                sk = sp.key_of(cell[0], cell[1], (ka, kb))
                da, wa, ia = ka
                bmat = a.d.block_at(da - 1, wa)
                if bmat is None:
                    continue
                for (r, c), v in bmat.entries.items():
                    if r != ia:
                        continue
                    xk = (da - 1, wa, c)
                    dd.add_entry(sk, sp.key_of(cell[0] + 1, cell[1], (xk, kb)),
                                 fld.mul(sign, v))
        super().__init__(sp, dd)
        self.hom_source = a
        self.hom_target = b

    def elt_to_map(self, elt: Elt) -> GradedMap:
        degs = {k[0] for k in elt}
        wts = {k[1] for k in elt}
        if len(degs) > 1 or len(wts) > 1:
            raise ValueError("hom element not homogeneous")
        deg = degs.pop() if degs else 0
        wt = wts.pop() if wts else 0
        g = GradedMap(self.hom_source.space, self.hom_target.space, deg, wt)
        for (d, w, i), v in elt.items():
            ka, kb = self.space.cells[(d, w)][i]
            g.add_entry(ka, kb, v)
        return g

    def map_to_elt(self, g: GradedMap) -> Elt:
        out: Elt = {}
        f = self.space.field
        for (d, w), b in g.blocks.items():
            for (r, c), v in b.entries.items():
                ka = (d, w, c)
                kb = (d + g.deg_shift, w + g.wt_shift, r)
                key = self.space.key_of(g.deg_shift, g.wt_shift, (ka, kb))
                out[key] = f.add(out.get(key, f.zero), v)
        return {k: v for k, v in out.items() if not f.is_zero(v)}


def tensor(a: CochainComplex, b: CochainComplex) -> TensorComplex:
    return TensorComplex(a, b)


def hom_complex(a: CochainComplex, b: CochainComplex) -> HomComplex:
    return HomComplex(a, b)


def unit_complex(field: Field, label="1") -> CochainComplex:
    sp = BiGradedSpace(field)
    sp.add_cell(0, 0, [label])
    sp.mark_all_complete()
    return CochainComplex(sp)
