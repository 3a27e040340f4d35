"""Writes results.csv: a constructed 10-participant, 5-question experiment.

Traditional: 8 of 10 participants make at least one error, 200 errors over
50 attempted answers (mean 4.0), accuracy falling from 60% on Q1 to 20% on
Q5. EDM: 49 of 50 answers correct, one answer with 15 errors (mean 0.3).
"""
import csv

QUESTIONS = ["Q1", "Q2", "Q3", "Q4", "Q5"]
PARTICIPANTS = [f"P{i:02d}" for i in range(1, 11)]

# Traditional: participants P01..P08 err on an increasing share of questions.
# correct_upto[q] = number of P01..P08 that answer question q correctly.
CORRECT_AMONG_FIRST8 = {"Q1": 4, "Q2": 3, "Q3": 2, "Q4": 1, "Q5": 0}
# Error counts handed out, in participant order, to the wrong answers of each
# question. Totals: 16 + 25 + 36 + 49 + 74 = 200.
ERRORS = {
    "Q1": [4, 4, 4, 4],
    "Q2": [5, 5, 5, 5, 5],
    "Q3": [6, 6, 6, 6, 6, 6],
    "Q4": [7, 7, 7, 7, 7, 7, 7],
    "Q5": [9, 9, 9, 9, 9, 9, 10, 10],
}


def traditional_rows():
    for q in QUESTIONS:
        wrong = iter(ERRORS[q])
        for i, p in enumerate(PARTICIPANTS):
            if i < 8 and i >= CORRECT_AMONG_FIRST8[q]:
                errors = next(wrong)
            else:
                errors = 0
            # Overconfident: self-ratings stay high whatever the outcome.
            confidence = 5 if i % 2 == 0 else 4
            difficulty = 4 if QUESTIONS.index(q) < 3 else 3
            yield [p, q, "traditional", 1, errors, confidence, difficulty]


def edm_rows():
    for qi, q in enumerate(QUESTIONS):
        for i, p in enumerate(PARTICIPANTS):
            errors = 15 if (q == "Q5" and p == "P10") else 0
            if errors:
                confidence, difficulty = 1, 1
            elif (i + qi) % 5 == 0:
                confidence, difficulty = 4, 5
            else:
                confidence, difficulty = 5, 5
            yield [p, q, "edm", 1, errors, confidence, difficulty]


with open("results.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["participant_id", "question_id", "approach", "attempted",
                "error_count", "confidence", "difficulty"])
    for row in traditional_rows():
        w.writerow(row)
    for row in edm_rows():
        w.writerow(row)
