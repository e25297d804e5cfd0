#!/usr/bin/env python3
"""The decision process the agent walks, and what the binary reward pays for.

Key mechanics on display: the always-available self_loop action (needed
because the bipartite schema makes courses reachable only in an odd number
of real hops), embedding-score action pruning, and the reward's three
conjuncts (ends on a course, course is in the learner's train set, more
than one effective hop).
"""

from pathrec.embeddings import EmbedConfig, train_embeddings
from pathrec.environment import Path, PathEnv, RewardSpec, reward
from pathrec.kg import split_enrollments, training_graph
from pathrec.schema import SELF_LOOP, EntityRef
from pathrec.synthetic import SynthConfig, generate


def main():
    kg = generate(SynthConfig())
    split = split_enrollments(kg, seed=1)
    train_kg = training_graph(kg, split)
    table, _ = train_embeddings(
        train_kg, EmbedConfig(d=24, epochs=40, learning_rate=5e-3, batch_size=256, seed=0)
    )
    env = PathEnv(train_kg, table, max_actions=250, history_len=1)
    spec = RewardSpec(mode="binary", train_enrollments=split.train_course_sets())

    learner = EntityRef("learner", 0)
    state = env.initial_state(learner, hop_budget=4)
    actions = env.actions(state)
    print(f"== actions at {kg.raw_id(learner)} (budget {state.hops_remaining}) ==")
    print(f"  {len(actions)} actions; first is always the self_loop: {actions[0][0]}")
    for rel, tail in actions[1:4]:
        print(f"  --{rel}--> {kg.raw_id(tail)} "
              f"(score {table.score(learner, rel, tail):+.3f})")

    # pick a co-enrolled learner who can route us to another of u0's train courses
    train_sets = split.train_course_sets()
    train_course = split.train[0][0]
    other_learner, second_course = next(
        (tail, EntityRef("course", c))
        for rel, tail in train_kg.neighbors(train_course)
        if rel == "enrolled_inv" and tail != learner
        for c in sorted(train_sets[tail.index] & (train_sets[0] - {train_course.index}))
    )

    trivial = Path(learner, (("enrolled", train_course),))
    padded = Path(learner, (("enrolled", train_course),
                            (SELF_LOOP, train_course), (SELF_LOOP, train_course)))
    shared = Path(learner, (("enrolled", train_course),
                            ("enrolled_inv", other_learner),
                            ("enrolled", second_course)))

    print("\n== binary reward ==")
    in_train = second_course.index in split.train_course_sets()[0]
    rows = [
        ("one hop straight to an enrolled course", trivial),
        ("same, padded with self-loops (still 1 effective hop)", padded),
        (f"3-hop via {kg.raw_id(other_learner)} "
         f"(target {'in' if in_train else 'NOT in'} learner's train set)", shared),
    ]
    for label, path in rows:
        print(f"  R={reward(path, spec):.0f}  {label}")

    print("\nself-loops consume budget but not effective hops:")
    print(f"  padded path: {len(padded.hops)} hops taken, "
          f"{padded.n_hops_effective} effective, pattern {padded.stripped_relations()}")


if __name__ == "__main__":
    main()
