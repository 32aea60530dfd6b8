"""Precision versus coverage through confidence thresholds
==========================================================

Trains on clean data, then evaluates a test set where a third of the
instances describe two sectors at once. The model answers those with low
confidence and gets about half wrong; raising the confidence floor
drops them first, buying precision with coverage.
"""

from taxotext import (
    ClassificationInstance,
    TrainConfig,
    load_sic_scheme,
    predict_instances,
    threshold_sweep,
    train,
)

scheme = load_sic_scheme()
cids = ("10", "20", "58", "73")


def body(cid):
    return f"telltale{cid} business with telltale{cid} offerings"


train_set = []
n = 0
for cid in cids:
    for i in range(40):
        n += 1
        train_set.append(
            ClassificationInstance(
                entity_id=f"t{n:04d}",
                input_text=f"Entity {n:04d}\n{body(cid)}",
                gold=scheme.by_id[cid],
                source_signature="gsnip10",
            )
        )

test_set, golds = [], []
for ci, cid in enumerate(cids):
    other = cids[(ci + 1) % len(cids)]
    for i in range(15):
        n += 1
        # every third test entity straddles two sectors; gold stays cid
        text = body(cid) if i % 3 else f"{body(cid)} {body(other)}"
        test_set.append(
            ClassificationInstance(
                entity_id=f"s{n:04d}",
                input_text=f"Entity {n:04d}\n{text}",
                gold=None,
                source_signature="gsnip10",
            )
        )
        golds.append(scheme.by_id[cid])

model = train(train_set, scheme, TrainConfig(epochs=8, warmup_steps=0))
preds = predict_instances(model, test_set)

points = threshold_sweep(preds, golds, scheme, thresholds=(0.0, 0.3, 0.5, 0.7, 0.9))
print("threshold  precision  recall   coverage  n")
for pt in points:
    print(f"{pt.threshold:<10.2f} {pt.precision:<10.3f} {pt.recall:<8.3f} "
          f"{pt.coverage:<9.3f} {pt.n_labeled}")
print("\nmacro scores average over all 27 categories, so 4 perfectly")
print("labeled ones top out at 4/27; recall and coverage only fall as")
print("the floor rises, while dropping the straddlers lifts precision")
