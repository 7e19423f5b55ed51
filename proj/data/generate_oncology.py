"""Writes the synthetic oncology example (oncology.csv).

Generating model, n = 180 patients:
  grade  in {G1, G2, G3}, probabilities 0.3 / 0.4 / 0.3
  stage  in {I, II, III, IV}, probabilities 0.25 each
  age    ~ Uniform(35, 80), rounded to whole years
  treat  ~ Bernoulli(0.5)
  log hazard ratio = grade effect {G1: 0, G2: 0.4, G3: 0.9}
                   + stage effect {I: 0, II: 0, III: 0.5, IV: 1.1}
                   + 0.02 * (age - 60) - 0.5 * treat
  event time  ~ Exponential(rate 0.1 * exp(log hazard ratio)), reported in months to one decimal
  censoring   ~ Uniform(0, 36) months; observed time = min(event, censoring), event = 1 if uncensored
Rounding to one decimal produces some tied times.
"""

import math
import random

GRADE = {"G1": 0.0, "G2": 0.4, "G3": 0.9}
STAGE = {"I": 0.0, "II": 0.0, "III": 0.5, "IV": 1.1}


def main(path="oncology.csv", n=180, seed=20240601):
    rng = random.Random(seed)
    rows = ["time,event,grade,stage,age,treat"]
    for _ in range(n):
        grade = rng.choices(list(GRADE), weights=[0.3, 0.4, 0.3])[0]
        stage = rng.choice(list(STAGE))
        age = round(rng.uniform(35, 80))
        treat = 1 if rng.random() < 0.5 else 0
        eta = GRADE[grade] + STAGE[stage] + 0.02 * (age - 60) - 0.5 * treat
        t_event = rng.expovariate(0.1 * math.exp(eta))
        t_cens = rng.uniform(0, 36)
        time = max(round(min(t_event, t_cens), 1), 0.1)
        event = 1 if t_event <= t_cens else 0
        rows.append(f"{time},{event},{grade},{stage},{age},{treat}")
    with open(path, "w") as out:
        out.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
