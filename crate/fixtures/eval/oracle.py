"""Independent derivation of the expected evaluation report for this fixture.

Re-implements subsumption, provided-interface matching, CRank and
precision/recall directly from their definitions, without sharing code with
the Rust crates. Run: python3 oracle.py  (prints the per-request trace and the
two report tables).
"""
import json, re, os

HERE = os.path.dirname(os.path.abspath(__file__))
onto = json.load(open(os.path.join(HERE, "..", "ontology.json")))
catalog = json.load(open(os.path.join(HERE, "catalog.json")))
requests = json.load(open(os.path.join(HERE, "requests.json")))
judgments = json.load(open(os.path.join(HERE, "judgments.json")))

concepts = {c["name"]: c for c in onto["concepts"]}
rep = {n: n for n in concepts}
for cls in onto["equivalences"]:
    for n in cls:
        rep[n] = cls[0]
parent = {}
for n, c in concepts.items():
    if "parent" in c:
        parent[rep[n]] = rep[c["parent"]]

def ancestors(n):
    r = rep[n]; out = [r]
    while r in parent:
        r = parent[r]; out.append(r)
    return out

def sub(a, b):  # a ⊑ b
    return rep[b] in ancestors(a)

def depth(n):
    return len(ancestors(n)) - 1

SCALE = {"%": 1, "percent": 1, "ms": 1, "s": 1000, "fps": 1, "dpi": 1}

def constraint(m):
    if "operands" in m:
        ops = m["operands"]
        v = 100 * ops["MTBF"] / (ops["MTBF"] + ops["MTTR"])
        return m["concept"], (v, v)
    t = m["expr"]
    rng = re.fullmatch(r"\s*([\d.]+)\s*<=\s*(\w+)\s*<=\s*([\d.]+)\s*(\S+)?\s*", t)
    if rng:
        k = SCALE[rng.group(4) or "ms"]
        return rng.group(2), (float(rng.group(1)) * k, float(rng.group(3)) * k)
    one = re.fullmatch(r"\s*(\w+)\s*(>=|<=|=)\s*([\d.]+)\s*(\S+)?\s*", t)
    name, op, v = one.group(1), one.group(2), float(one.group(3))
    v *= SCALE[one.group(4) or "ms"]
    d = concepts[name]["domain"]
    lo, hi = {">=": (v, d["max"]), "<=": (d["min"], v), "=": (v, v)}[op]
    return name, (max(lo, d["min"]), min(hi, d["max"]))

def norm(name, iv):
    d = concepts[name]["domain"]
    return tuple((x - d["min"]) / (d["max"] - d["min"]) for x in iv)

def match_provided(req, cand):
    """Returns (weight, pairs) or None for a provided interface."""
    exact = all(any(rep[r] == rep[c] for c, _ in cand) for r, _ in req) and \
            all(any(rep[r] == rep[c] for r, _ in req) for c, _ in cand)
    if exact:
        pairs = [((r, ri), next((c, ci) for c, ci in cand if rep[c] == rep[r])) for r, ri in req]
        return 1, pairs
    plugin = all(any(sub(c, r) for c, _ in cand) for r, _ in req)
    if plugin:
        used, pairs = set(), []
        for r, ri in req:
            opts = sorted(((-depth(c), c, ci) for c, ci in cand if sub(c, r) and c not in used))
            if opts:
                _, c, ci = opts[0]; used.add(c); pairs.append(((r, ri), (c, ci)))
        return 2, pairs
    return None

def crank(weight, pairs):
    total = 0.0
    for (r, ri), (c, ci) in pairs:
        a, b = norm(r, ri), norm(c, ci)
        total += (abs(a[1] - b[1]) + abs(a[0] - b[0])) / 2
    return total / weight

rows = {"match_only": [], "match_and_rank": []}
for rq in requests:
    req = [constraint(m) for m in rq["provided"][0]["metrics"]]
    sigma = {}
    for comp in catalog["components"]:
        cand = [constraint(m) for m in comp["provided"][0]["metrics"]]
        res = match_provided(req, cand)
        if res:
            sigma[comp["name"]] = crank(*res)
    ranked = {n for n, s in sigma.items() if s <= rq.get("rank_threshold", float("inf"))}
    rel = set(judgments[rq["name"]])
    print(rq["name"], {n: round(s, 6) for n, s in sorted(sigma.items(), key=lambda x: (x[1], x[0]))}, "relevant:", sorted(rel))
    for mode, sel in (("match_only", set(sigma)), ("match_and_rank", ranked)):
        hits = len(sel & rel)
        p = hits / len(sel) if sel else 1.0
        r = hits / len(rel) if rel else 1.0
        rows[mode].append((rq["name"], p, r))

for mode, rs in rows.items():
    print(mode)
    for n, p, r in rs:
        print(f"  {n} {p:.3f} {r:.3f}")
    print(f"  Average {sum(p for _, p, _ in rs) / len(rs):.3f} {sum(r for _, _, r in rs) / len(rs):.3f}")
