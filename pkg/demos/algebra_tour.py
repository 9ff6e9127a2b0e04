"""Tour of the superoperator algebra on a truncated Fock space.

Exact identities hold at any truncation.  Identities that rely on the
canonical commutator hold only on low Fock levels, because the top level
breaks [q, p] = i hbar.  Shrinking the basis exposes that split.
"""
from dynaquant.simcli.algebra import check_algebra

for n, profile in ((32, "default"), (8, "strict")):
    report = check_algebra(n, profile)
    print(report.text())
    failed = [line.name for line in report.lines if not line.passed]
    print(f"failed: {', '.join(failed) if failed else 'none'}\n")
