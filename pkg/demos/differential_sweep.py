"""
A small differential sweep
==========================

Every formula over p and q with at most 6 nodes and modal depth at most 2
is decided under each density specification and compared with exhaustive
search over frames of up to four worlds.
"""

import collections
import time

from quasidense import KLSpec, Found, Sat, decide, enumerate_models, generate_corpus
from quasidense.solver import verify_certificate

corpus = generate_corpus(["p", "q"], 2, 6)
print(len(corpus), "formulas")

for spec in ("1:2", "1:3", "2:3", "1:2,2:4"):
    kl = KLSpec.parse(spec)
    tally = collections.Counter()
    start = time.perf_counter()
    for phi in corpus:
        verdict = decide(phi, kl)
        oracle = enumerate_models(phi, kl)
        sat = isinstance(verdict, Sat)
        tally[type(verdict).__name__] += 1
        # a mismatch would mean either a wrong model or a missed one
        if sat and not verify_certificate(verdict.model, phi, kl).ok:
            tally["bad model"] += 1
        if isinstance(oracle, Found) and not sat:
            tally["missed"] += 1
    print(f"{spec:8s} {dict(tally)}  {time.perf_counter() - start:.1f}s")
