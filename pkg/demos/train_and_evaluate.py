"""Train the native classifier on a synthetic corpus
=====================================================

Builds a small labeled corpus where each category has its own telltale
token, trains the hashed-feature softmax model, and prints the macro
scores with a per-class breakdown.
"""

from taxotext import (
    ClassificationInstance,
    TrainConfig,
    confusion,
    load_sic_scheme,
    macro_report,
    predict_instances,
    train,
)

scheme = load_sic_scheme()
cids = ("10", "20", "58", "73")

train_set, test_set, golds = [], [], []
n = 0
for cid in cids:
    label = scheme.by_id[cid]
    for i in range(30):
        n += 1
        body = f"telltale{cid} business with telltale{cid} offerings"
        inst = ClassificationInstance(
            entity_id=f"e{n:04d}",
            input_text=f"Entity {n:04d}\n{body}",
            gold=label if i < 24 else None,
            source_signature="gsnip10",
        )
        if i < 24:
            train_set.append(inst)
        else:
            test_set.append(inst)
            golds.append(label)

# short schedule; the corpus is tiny and trivially separable
config = TrainConfig(epochs=5, batch_size=8, warmup_steps=0)
model = train(train_set, scheme, config)

preds = predict_instances(model, test_set)
report = macro_report(confusion(golds, [p.label for p in preds], scheme))

print(f"train={len(train_set)} test={len(test_set)}")
print(f"macro P={report.macro_p:.3f} R={report.macro_r:.3f} F1={report.macro_f1:.3f}")
print("(macro averages run over all 27 categories, populated or not)\n")

print("category  P      R      F1     support")
for score in report.per_class:
    if score.support == 0:
        continue
    print(f"{score.category_id:<9} {score.precision:<6.3f} {score.recall:<6.3f} "
          f"{score.f1:<6.3f} {score.support}")

confident = [p for p in preds if p.confidence > 0.5]
print(f"\npredictions above 0.5 confidence: {len(confident)}/{len(preds)}")
