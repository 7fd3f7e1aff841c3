"""Independent recomputation of end-to-end latencies for fixtures/apartment.json.

Reads the scenario and the bundled cost presets, evaluates a few fixed
schedules straight from the latency definitions and writes the results to
fixtures/apartment.expected.json. With --check, compares instead of writing.
"""
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
SCENARIO = ROOT / "fixtures" / "apartment.json"
PRESETS = ROOT / "crates" / "core" / "profiles" / "default.json"
EXPECTED = ROOT / "fixtures" / "apartment.expected.json"

SCHEDULES = {
    "zones_in_order": ([[0, 3, 6, 9], [1, 4, 7], [2, 5, 8]], [0, 1, 2]),
    "zones_rotated": ([[0, 3, 6, 9], [1, 4, 7], [2, 5, 8]], [2, 0, 1]),
    "interleaved": ([[0, 1, 2, 3], [4, 5, 6], [7, 8, 9]], [1, 2, 0]),
}


def fusion(model, k, scale):
    return scale * (model["alpha"] * k * k + model["beta"] * k + model["gamma"])


def group_size(group, sizes, w):
    total = sum(sizes[i] for i in group)
    for a in range(len(group)):
        for b in range(a + 1, len(group)):
            i, j = group[a], group[b]
            total -= w[i][j] * (sizes[i] + sizes[j])
    return min(max(total, max(sizes[i] for i in group)), sum(sizes[i] for i in group))


def schedule_latency(scn, prof, groups, servers):
    sizes = [r["map_bytes"] for r in scn["robots"]]
    w = scn["overlap_matrix"]
    arrivals = []
    for group, s in zip(groups, servers):
        e = scn["edges"][s]
        bw = min(prof["robot_uplink_bw"], e["uplink_bw_robot"])
        ready = max(prof["t_pack"] + scn["robots"][r]["raw_frame_bytes"] / bw + prof["t_frame"] for r in group)
        t_e = ready + fusion(prof["edge_fusion"], len(group), e["compute_scale"])
        arrivals.append(t_e + group_size(group, sizes, w) / e["uplink_bw_cloud"])
    return max(arrivals) + fusion(prof["cloud_fusion"], len(groups), 1.0)


def cloud_latency(scn, prof):
    slowest = max(prof["local_slam_latency"] + r["map_bytes"] / prof["cloud_uplink_bw_robot"] for r in scn["robots"])
    return slowest + fusion(prof["cloud_fusion"], len(scn["robots"]), 1.0)


def main():
    scn = json.loads(SCENARIO.read_text())
    prof = json.loads(PRESETS.read_text())[scn["cost_params"]]
    values = {name: schedule_latency(scn, prof, g, s) for name, (g, s) in SCHEDULES.items()}
    values["cloud"] = cloud_latency(scn, prof)
    doc = {
        "schedules": {name: {"groups": g, "servers": s} for name, (g, s) in SCHEDULES.items()},
        "total_latency_s": values,
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if "--check" in sys.argv:
        frozen = json.loads(EXPECTED.read_text())["total_latency_s"]
        bad = [k for k, v in values.items() if abs(v - frozen[k]) > 1e-9 * abs(frozen[k])]
        if bad:
            print("mismatch:", bad)
            sys.exit(1)
        print("ok")
    else:
        EXPECTED.write_text(text)
        print(text, end="")


if __name__ == "__main__":
    main()
