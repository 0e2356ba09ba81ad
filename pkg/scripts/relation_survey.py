"""Tabulate A(as), A(ch) and the invariant ratios over random normal forms.

Usage: python3 scripts/relation_survey.py [--count N] [--seed S]
"""
import argparse

import numpy as np

from frontal.bde import classify_swallowtail_foliations
from frontal.normal_form import (build_second_kind, extract_coeffs, invariants_from_coeffs,
                                 random_normalized_generator)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    cols = ("kappa_nu", "mu_c", "tau_s", "A_as", "A_ch", "ratio_as", "type_as", "type_ch")
    print(",".join(cols))
    for _ in range(args.count):
        gen, _, _ = random_normalized_generator(rng)
        inv = invariants_from_coeffs(extract_coeffs(gen))
        if abs(inv.kappa_nu) < 1e-6:
            continue
        rep = classify_swallowtail_foliations(build_second_kind(gen), inv)
        row = (inv.kappa_nu, inv.mu_c, inv.tau_s, rep.class_as.l_value, rep.class_ch.l_value,
               rep.sign_report["ratio_as"])
        print(",".join(f"{x:.6g}" for x in row) + f",{rep.class_as.variant},{rep.class_ch.variant}")


if __name__ == "__main__":
    main()
