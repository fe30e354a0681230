#!/usr/bin/env python3
"""External-solver shim: solve an MPS file with highspy.

Usage: highs_solve.py MODEL.mps SOLUTION.sol MIP_GAP TIME_LIMIT
"""
import sys

import highspy


def main(argv):
    if len(argv) != 5:
        print(__doc__, file=sys.stderr)
        return 2
    mps, out, gap, limit = argv[1], argv[2], float(argv[3]), float(argv[4])

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", gap)
    h.setOptionValue("time_limit", limit)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    if h.readModel(mps) == highspy.HighsStatus.kError:
        print(f"cannot read {mps}", file=sys.stderr)
        return 1
    h.run()

    ms = highspy.HighsModelStatus
    st = h.getModelStatus()
    info = h.getInfo()
    has_primal = info.primal_solution_status == 2
    lp = h.getLp()
    is_mip = any(int(k) != 0 for k in (lp.integrality_ or []))
    if st == ms.kOptimal:
        status = "optimal"
    elif st == ms.kInfeasible:
        status = "infeasible"
    elif st in (ms.kUnbounded, ms.kUnboundedOrInfeasible):
        status = "unbounded"
    elif st == ms.kTimeLimit:
        status = "timeout"
    elif has_primal:
        status = "feasible-gap"
    else:
        print(f"unhandled model status {h.modelStatusToString(st)}", file=sys.stderr)
        return 1

    lines = [f"status {status}"]
    if has_primal and status in ("optimal", "timeout", "feasible-gap"):
        sol = h.getSolution()
        lines.append(f"objective {info.objective_function_value!r}")
        if is_mip:
            lines.append(f"bound {info.mip_dual_bound!r}")
        for name, v in zip(lp.col_names_, sol.col_value):
            lines.append(f"var {name} {v!r}")
        if not is_mip and status == "optimal":
            for name, y in zip(lp.row_names_, sol.row_dual):
                lines.append(f"dual {name} {y!r}")
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
