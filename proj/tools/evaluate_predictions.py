#!/usr/bin/env python3
"""Score a shared-task prediction file against a WorldTree question file.

Reads the raw question TSV (explanation column "uid|ROLE ...") and a
prediction file of "questionID<TAB>factUID" lines, and prints MAP.

Written independently of the C++ scorer so the two can be cross-checked.
"""

import argparse
import csv
import os
import sys


def read_gold(path, known_uids=None):
    gold = {}
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = [h.strip() for h in next(reader)]
        qcol = header.index("QuestionID")
        ecol = header.index("explanation") if "explanation" in header else None
        for row in reader:
            if not row or qcol >= len(row) or not row[qcol].strip():
                continue
            uids = []
            if ecol is not None and ecol < len(row):
                for entry in row[ecol].split():
                    parts = entry.split("|")
                    if len(parts) != 2 or not parts[0]:
                        continue
                    if known_uids is not None and parts[0] not in known_uids:
                        continue
                    if parts[0] not in uids:
                        uids.append(parts[0])
            gold[row[qcol].strip()] = uids
    return gold


def read_table_uids(tables_dir):
    uids = set()
    for name in sorted(os.listdir(tables_dir)):
        if not name.endswith(".tsv"):
            continue
        with open(os.path.join(tables_dir, name), encoding="utf-8", newline="") as f:
            reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
            header = next(reader, [])
            if "[SKIP] UID" not in header:
                continue
            col = header.index("[SKIP] UID")
            for row in reader:
                if col < len(row) and row[col].strip():
                    uids.add(row[col].strip())
    return uids


def read_predictions(path):
    preds = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            qid, uid = line.split("\t", 1)
            preds.setdefault(qid, []).append(uid)
    return preds


def average_precision(ranking, gold):
    gold = set(gold)
    found, total = set(), 0.0
    for rank, uid in enumerate(ranking, start=1):
        if uid in gold and uid not in found:
            found.add(uid)
            total += len(found) / rank
    return total / len(gold)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("questions", help="WorldTree question TSV with an explanation column")
    ap.add_argument("predictions", help="questionID<TAB>factUID lines, best first")
    ap.add_argument("--tables", help="fact table directory; gold UIDs not found there are dropped")
    ap.add_argument("--precision", type=int, default=10)
    args = ap.parse_args()

    known = read_table_uids(args.tables) if args.tables else None
    gold = read_gold(args.questions, known)
    preds = read_predictions(args.predictions)
    scores = [average_precision(preds.get(q, []), g) for q, g in gold.items() if g]
    if not scores:
        print("no scoreable questions", file=sys.stderr)
        return 2
    print(f"MAP: {sum(scores) / len(scores):.{args.precision}f}")
    print(f"questions: {len(scores)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
