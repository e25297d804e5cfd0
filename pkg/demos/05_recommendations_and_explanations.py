#!/usr/bin/env python3
"""Beam-search recommendation with the path itself as the explanation.

After training, each learner gets a top-K list where every item carries its
best path; the path renders as human-readable text (or DOT for graph
tools). Courses already in the learner's train set never appear.
"""

from pathrec.embeddings import EmbedConfig, train_embeddings
from pathrec.environment import PathEnv, RewardSpec
from pathrec.inference import recommend_all
from pathrec.kg import split_enrollments, training_graph
from pathrec.patterns import render_path, render_path_dot
from pathrec.policy import AgentConfig, train_agent
from pathrec.synthetic import SynthConfig, generate


def main():
    kg = generate(SynthConfig())
    split = split_enrollments(kg, seed=1)
    train_kg = training_graph(kg, split)
    table, _ = train_embeddings(
        train_kg, EmbedConfig(d=24, epochs=40, learning_rate=5e-3, batch_size=256, seed=0)
    )
    cfg = AgentConfig(max_hops_eval=3, epochs=25, hidden=64, batch_episodes=128, seed=0)
    train_sets = split.train_course_sets()
    spec = RewardSpec(mode="binary", train_enrollments=train_sets)
    params, _log = train_agent(train_kg, table, cfg, spec)

    env = PathEnv(train_kg, table, cfg.max_actions, cfg.history)
    learners = train_kg.learners()[:20]
    lists, invalid = recommend_all(learners, env, params, train_sets,
                                   beam_widths=(25, 10, 10), n=10)
    print(f"recommended for {len(learners)} learners "
          f"(invalid-user fraction {invalid * 100:.1f}%)\n")

    learner = learners[0]
    rec = lists[learner.index]
    print(f"== top courses for {kg.raw_id(learner)} ==")
    for rank, item in enumerate(rec.items[:5], start=1):
        print(f"  {rank}. {kg.raw_id(item.course)}  (log-prob {item.score:.2f})")
        print(f"     because: {render_path(item.best_path, kg)}")

    print("\n== the #1 explanation as DOT ==")
    print(render_path_dot(rec.items[0].best_path, kg))


if __name__ == "__main__":
    main()
