"""Writes the noiseless synthetic fixtures in tests/fixtures."""
import csv
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def hinge(z, tau):
    return max(z - tau, 0.0)


def bedload():
    rng = random.Random(76)
    alpha, beta, gamma, tau = -0.0053, 0.0119, 0.0733, 1.5394
    z = sorted(round(rng.uniform(0.25, 1.5), 4) for _ in range(58))
    z += sorted(round(rng.uniform(1.56, 2.7), 4) for _ in range(18))
    rows = [(zi, alpha + beta * zi + gamma * hinge(zi, tau)) for zi in z]
    with open(OUT / "bedload_synthetic.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["discharge", "transport"])
        for zi, yi in rows:
            w.writerow([repr(zi), repr(yi)])


def running_speed():
    rng = random.Random(107)
    a0, a1, beta, gamma, tau = 3.208, 0.640, 0.285, -0.409, 3.658
    rows = []
    for i in range(107):
        z = round(rng.uniform(-3.0, 8.7), 4)
        hopper = 1 if i % 9 == 0 else 0
        rows.append((z, hopper, a0 + a1 * hopper + beta * z + gamma * hinge(z, tau)))
    with open(OUT / "running_speed_synthetic.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["log_mass", "hopper", "log_speed"])
        for z, h, y in rows:
            w.writerow([repr(z), h, repr(y)])


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    bedload()
    running_speed()
