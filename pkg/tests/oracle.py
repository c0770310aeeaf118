"""Reference interpreter for single-defect runs.

Written straight from the per-range behavior descriptions as an event table,
without the package's classifier, fault engine or runner. Only the parsed
program items and the profile thresholds are shared.

Adjacency is tracked with timestamps rather than flags: a read is "right
after" a write when nothing has disturbed the cell (a read anywhere in its
row, or a power-mode change) since the write.
"""
from lpsram.dsl import Iddq, Lpm, MarchElement, Nm, Res


def traits(kind, p, r, prof):
    """Which per-event reactions the defective cell has, given its range."""
    t = {}
    if kind == "R1":
        if r < prof.r1_low:
            t["stuck"] = 1 - p                      # cannot be written
        elif r <= prof.r1_high:
            t["lpm_flip"] = p                       # loses p across LPM
            t["leak"] = p                           # extra quiescent current holding p
            lo, hi = prof.r1_res_sub
            if lo <= r <= hi:
                t["stress"] = p                     # row-mate reads wear p down
    elif kind == "R2":
        if r >= prof.r2_low:
            t["raw"] = p                            # read right after writing p flips
        if r >= prof.r2_high:
            t["after_lpm"] = p                      # first read after LPM flips p
    elif kind == "R3":
        if r >= prof.r3_low:
            t["no_rise"] = p                        # cannot be written to p
    return t


class Oracle:
    def __init__(self, rows, cols, kind, p, r, loc, prof):
        self.rows, self.cols, self.prof = rows, cols, prof
        self.loc = loc
        self.t = traits(kind, p, r, prof) if kind else {}
        self.val = {}          # addr -> stored bit (absent = never written)
        self.good = {}         # fault-free expectation
        self.clock = 0
        self.wrote_at = {}     # addr -> (clock, value)
        self.disturbed_at = {}  # row -> clock of last read in the row
        self.mode_change_at = -1
        self.lpm_since_access = False
        self.stress = 0
        self.in_lpm = False
        self.fail = []         # (item, phase, addr)

    def tick(self):
        self.clock += 1
        return self.clock

    def write(self, a, v):
        now = self.tick()
        self.good[a] = v
        if a == self.loc:
            t = self.t
            if "stuck" in t:
                self.val[a] = t["stuck"]
            elif "no_rise" in t and v == t["no_rise"] and self.val.get(a) != v:
                self.val[a] = 1 - v
            else:
                self.val[a] = v
            self.wrote_at[a] = (now, v)
            self.stress = 0
            self.lpm_since_access = False
        else:
            self.val[a] = v

    def read(self, a):
        now = self.tick()
        t = self.t
        out = self.val.get(a, 0)
        if a == self.loc:
            held = self.val.get(a)
            w = self.wrote_at.get(a)
            fresh = (w is not None and w[0] > self.disturbed_at.get(a[0], -1)
                     and w[0] > self.mode_change_at)
            if "stuck" in t:
                out = t["stuck"]
            elif "after_lpm" in t and self.lpm_since_access and held == t["after_lpm"]:
                out = self.val[a] = 1 - held
            elif "raw" in t and fresh and w[1] == t["raw"]:
                out = self.val[a] = 1 - t["raw"]
            self.stress = 0
            self.lpm_since_access = False
        elif a[0] == self.loc[0] and "stress" in t and self.val.get(self.loc) == t["stress"]:
            self.stress += 1
            if self.stress >= self.prof.res_k:
                self.val[self.loc] = 1 - t["stress"]
                self.stress = 0
        self.disturbed_at[a[0]] = now
        return out

    def check(self, idx, phase, a, want):
        got = self.read(a)
        exp = self.good.get(a) if want is None or self.good.get(a) is not None else want
        if exp is not None and got != exp:
            self.fail.append((idx, phase, a))

    def addresses(self, order):
        seq = [(r, c) for r in range(self.rows) for c in range(self.cols)]
        return seq[::-1] if order.value == "v" else seq

    def run(self, program):
        for idx, it in enumerate(program.items):
            if isinstance(it, MarchElement):
                for a in self.addresses(it.order):
                    for op in it.ops:
                        if op[0] == "w":
                            self.write(a, int(op[1]))
                        else:
                            self.check(idx, "march", a, int(op[1]) if len(op) == 2 else None)
            elif isinstance(it, Lpm):
                self.mode_change_at = self.tick()
                self.in_lpm = True
            elif isinstance(it, Nm):
                self.mode_change_at = self.tick()
                self.in_lpm = False
                held = self.val.get(self.loc)
                if "lpm_flip" in self.t and held == self.t["lpm_flip"]:
                    self.val[self.loc] = 1 - held
                    held = 1 - held
                if "after_lpm" in self.t and held == self.t["after_lpm"]:
                    self.lpm_since_access = True
            elif isinstance(it, Iddq):
                leak = "leak" in self.t and self.val.get(self.loc) == self.t["leak"]
                current = self.rows * self.cols * self.prof.iddq_baseline
                if leak:
                    current += self.prof.iddq_delta
                if current > self.rows * self.cols * self.prof.iddq_baseline + self.prof.iddq_threshold_margin:
                    self.fail.append((idx, "iddq", None))
            elif isinstance(it, Res):
                for r in range(self.rows):
                    for j in range(self.cols):
                        v = (r, j)
                        self.check(idx, "pre", v, None)
                        others = [(r, c) for c in range(self.cols) if c != j]
                        for k in range(it.n if others else 0):
                            self.check(idx, "stress", others[k % len(others)], None)
                        self.check(idx, "post", v, None)
        return self

    def detected(self):
        return bool(self.fail)

    def res_detected(self):
        pre = {(i, a) for i, ph, a in self.fail if ph == "pre"}
        return any(ph == "post" and (i, a) not in pre for i, ph, a in self.fail)


def table_verdict(test_name, program, rows, cols, kind, p, r, loc, prof):
    o = Oracle(rows, cols, kind, p, r, loc, prof).run(program)
    hit = o.res_detected() if test_name == "res" else o.detected()
    return "Detected" if hit else "Undetected"
