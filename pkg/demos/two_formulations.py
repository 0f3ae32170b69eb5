"""New versus traditional CC equations at (3,6), sigma = {2,3}.

The variety is linear here, so the new formulation has dim+1 = 11 solutions
and for real H they are eigenpairs of the principal block H[S,S].  The
traditional similarity-transformed equations have 20 complex solutions, and
the number of real ones varies with H.

    python3 demos/two_formulations.py
"""
import numpy as np

from ccvar.ccsystem import formulations_equivalent
from ccvar.homotopy import StoppingRule, monodromy_solve, solve_target
from ccvar.indexing import TruncationSet

trunc = TruncationSet((2, 3), 3, 6)
stop = StoppingRule(quiet_loops=8)
new = monodromy_solve(trunc, seed=1, stop=stop)
trad = monodromy_solve(trunc, seed=1, stop=stop, formulation="traditional")
print(f"generic counts: new {new.count}, traditional {trad.count}")
print(f"formulations_equivalent({trunc.sigma}) = {formulations_equivalent(trunc)}")

rng = np.random.default_rng(5)
S = trunc.rows
for trial in range(5):
    A = rng.normal(size=(20, 20))
    H = (A + A.T) / 2
    sn = solve_target(new, H, seed=trial)
    st = solve_target(trad, H, seed=trial)
    lam = np.sort([s.lam.real for s in sn.solutions])
    eig = np.linalg.eigvalsh(H[np.ix_(S, S)])
    n_real = sum(s.real for s in st.solutions if s.cls == "nonsingular")
    print(f"H #{trial}: new energies vs eigenvalues {np.abs(lam - eig).max():.1e}, "
          f"traditional real solutions {n_real} of {len(st.solutions)}")
