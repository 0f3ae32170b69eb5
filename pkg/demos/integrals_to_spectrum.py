"""From an integral file to CC energies next to the FCI spectrum.

Writes seeded synthetic integrals for 2 electrons in 4 spin orbitals,
reads them back, assembles the Hamiltonian by Slater-Condon rules, solves
the sigma = {1} CC equations by parameter homotopy from a generic start,
and prints the spectrum comparison.

    python3 demos/integrals_to_spectrum.py
"""
import tempfile
from pathlib import Path

from ccvar.chemio import assemble_hamiltonian, parse_integrals, random_integrals, spectrum_report, write_integrals
from ccvar.homotopy import StoppingRule, monodromy_solve, solve_target
from ccvar.indexing import TruncationSet

d, n = 2, 4
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "synthetic.int"
    write_integrals(random_integrals(n, seed=7), path)
    table = parse_integrals(path)

H = assemble_hamiltonian(table, d)
trunc = TruncationSet((1,), d, n)
start = monodromy_solve(trunc, seed=0, stop=StoppingRule(quiet_loops=5))
sols = solve_target(start, H.matrix, seed=0)
report = spectrum_report(H, sols)

print("FCI eigenvalues:", " ".join(f"{e:.6f}" for e in report.eigenvalues))
print("counts:", report.counts)
for e in sorted(report.entries, key=lambda e: (e["lambda"].real, e["lambda"].imag)):
    lam = e["lambda"]
    tag = f"nearest FCI {e['nearest_fci']:.6f}, distance {e['distance']:.1e}" if e["real"] else "complex"
    shown = f"{lam.real:+.6f}" if e["real"] else f"{lam.real:+.6f}{lam.imag:+.6f}i"
    print(f"  {shown:<22} {e['class']:<11} {tag}")
