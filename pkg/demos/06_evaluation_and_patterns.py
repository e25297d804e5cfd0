#!/usr/bin/env python3
"""Ranking metrics against baselines, and which path shapes the agent uses.

Produces the standard report row (NDCG / Recall / HR / Precision at 10 plus
the invalid-user fraction) for the popularity baseline, a latent-factor
baseline, and the path-based recommender, then tallies the relation
patterns behind the recommendations made to test learners.
"""

from pathrec.embeddings import EmbedConfig, train_embeddings
from pathrec.environment import PathEnv, RewardSpec
from pathrec.inference import recommend_all
from pathrec.kg import split_enrollments, training_graph
from pathrec.metrics import (
    MetricsReport,
    evaluate,
    format_report_table,
    mf_baseline,
    pop_lists,
)
from pathrec.patterns import format_frequency_block, frequency_report
from pathrec.policy import AgentConfig, train_agent
from pathrec.synthetic import SynthConfig, generate


def main():
    kg = generate(SynthConfig())
    split = split_enrollments(kg, seed=1)
    train_kg = training_graph(kg, split)
    n_courses = kg.n_entities("course")
    train_sets = split.train_course_sets()

    pop_run = evaluate(pop_lists(split, n_courses, k=10), split, k=10)
    mf_runs = [
        evaluate(mf_baseline(split, n_courses, seed=seed), split, k=10)
        for seed in (0, 1)
    ]

    agent_runs, all_lists = [], {}
    for seed in (0, 1):
        table, _ = train_embeddings(
            train_kg,
            EmbedConfig(d=24, epochs=40, learning_rate=5e-3, batch_size=256, seed=seed),
        )
        cfg = AgentConfig(max_hops_eval=3, epochs=25, hidden=64,
                          batch_episodes=128, seed=seed)
        spec = RewardSpec(mode="binary", train_enrollments=train_sets)
        params, _ = train_agent(train_kg, table, cfg, spec)
        env = PathEnv(train_kg, table, cfg.max_actions, cfg.history)
        lists, _ = recommend_all(train_kg.learners(), env, params, train_sets,
                                 beam_widths=(25, 10, 10), n=10)
        agent_runs.append(evaluate(lists, split, k=10))
        all_lists = lists

    reports = [
        MetricsReport.aggregate("Pop", "Popularity", None, [pop_run, pop_run]),
        MetricsReport.aggregate("MF", "Collaborative Filtering", None, mf_runs),
        MetricsReport.aggregate("UPGPR", "Path-Based", 3, agent_runs),
    ]
    print(format_report_table(reports))

    paths = [
        item.best_path
        for u, courses in sorted(split.test.items())
        if courses
        for item in all_lists[u].items
    ]
    print("\n== path patterns behind the recommendations (last seed) ==")
    print(format_frequency_block(frequency_report(paths)))


if __name__ == "__main__":
    main()
