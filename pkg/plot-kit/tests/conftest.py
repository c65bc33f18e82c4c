"""Hand-built input files matching the simulator's documented formats."""

import json

SWEEP_HEADER = ("alpha,beta,T,N,N_p,N_v,l_p,l_v,role,honesty,"
                "mean_return,std_err,ci95,samples")

LP_CELLS = ("0.0", "0.1", "0.2", "0.3", "0.4")
LV_CELLS = ("0.0", "0.3")


def sweep_csv_text() -> str:
    """A small sweep grid: 2 voter fractions x 5 proposer fractions.

    Honest-proposer means are unique per grid point so tests can match
    them exactly.  One class is given empty estimate cells the way the
    simulator writes classes that drew no samples.
    """
    lines = ["# flocksim-sweep/1", SWEEP_HEADER]
    for lv_i, lv in enumerate(LV_CELLS):
        for lp_i, lp in enumerate(LP_CELLS):
            for role in ("proposer", "voter"):
                for honesty in ("honest", "malicious"):
                    if honesty == "malicious" and lp == "0.0" \
                            and role == "proposer":
                        mean, err, ci, n = "", "", "", "0"
                    elif role == "proposer" and honesty == "honest":
                        mean = f"0.0{2 + lv_i}{lp_i}"
                        err, ci, n = "0.0005", "0.001", "4000"
                    else:
                        mean = f"-0.00{lp_i + 1}"
                        err, ci, n = "0.0004", "0.0008", "3000"
                    lines.append(",".join([
                        "0.05", "0.1", "11", "100", "10", "20", lp, lv,
                        role, honesty, mean, err, ci, n]))
    return "\n".join(lines) + "\n"


def honest_proposer_cells() -> dict:
    """(l_v cell, l_p cell) -> (mean cell, ci95 cell) as written above."""
    out = {}
    for lv_i, lv in enumerate(LV_CELLS):
        for lp_i, lp in enumerate(LP_CELLS):
            out[(lv, lp)] = (f"0.0{2 + lv_i}{lp_i}", "0.001")
    return out


def rounds_jsonl_text(n_seeds: int = 2, rounds: int = 3,
                      malicious: bool = True) -> str:
    """A round log with arithmetic-friendly stakes.

    Honest mean at round r works out to 1001.5 + r, malicious to
    900.5 - 10r, pooling the two seeds.
    """
    classes = {"n000": "honest", "n001": "honest"}
    if malicious:
        classes["n002"] = "malicious"
    meta = {"schema": "flocksim-rounds/1", "n_seeds": n_seeds,
            "rounds": rounds, "min_stake": 100, "initial_stake": 1000,
            "node_classes": classes, "run_seeds": list(range(n_seeds))}
    lines = [json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    for s in range(n_seeds):
        for r in range(rounds):
            stakes = {"n000": 1000 + r + s, "n001": 1002 + r + s}
            if malicious:
                stakes["n002"] = 900 - 10 * r + s
            rec = {"seed": s, "round": r, "status": "completed",
                   "stakes": stakes}
            lines.append(json.dumps(rec, sort_keys=True,
                                    separators=(",", ":")))
    return "\n".join(lines) + "\n"
