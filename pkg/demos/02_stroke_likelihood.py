"""
Stroke likelihood and outpatient priority
=========================================

Each outpatient has a 30-day record of discretized readings with a daily
stroke label. A naive Bayes model trained on it scores today's state; the
score raises the outpatient's weight in the allocation.
"""

from patient_hetnet import bayes

# raw readings are mapped onto levels first
print(bayes.discretize(cholesterol=232, systolic=131, diastolic=92, cigarettes=14))

records = bayes.builtin_records()
classifiers = [bayes.train(r, smoothing=1.0) for r in records]
print("days labeled yes per record:", [c.class_counts["yes"] for c in classifiers])

print("\nstate                                                    OP8    OP9    OP10")
for state in bayes.builtin_current_states():
    deltas = [bayes.posterior(c, state) for c in classifiers]
    print(f"{str(state):55s}" + "".join(f"{d:7.3f}" for d in deltas))

# the weight grows linearly with alpha
state = bayes.builtin_current_states()[3]
delta = bayes.posterior(classifiers[0], state)
for alpha in (50, 500, 1000):
    print(f"alpha={alpha:4d}: UP = {bayes.priority(delta, alpha, is_outpatient=True):.1f}")

# how well does each model fit its own record?
for k, (rec, clf) in enumerate(zip(records, classifiers), start=8):
    print(f"OP{k}", bayes.evaluate(clf, rec).to_dict())
