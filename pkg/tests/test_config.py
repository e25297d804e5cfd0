import pytest

from pathrec.config import RunConfig, default_config_text, load_config, parse_config_text
from pathrec.errors import ConfigError


def test_defaults_match_module_defaults():
    cfg = parse_config_text("")
    assert cfg.embed_d == 100
    assert cfg.agent_epochs == 50
    assert cfg.agent_learning_rate == pytest.approx(1e-3)
    assert cfg.embed_batch_size == 512
    assert cfg.split_ratios == (0.8, 0.1, 0.1)
    assert cfg.min_enrollments == 10
    assert cfg.eval_k == 10


def test_overrides_and_comments():
    text = """
# a comment
embed.d = 16
agent.train_extra_hop = false
split.ratios = 0.6,0.2,0.2
beam.widths = 4,3,2
"""
    cfg = parse_config_text(text)
    assert cfg.embed_d == 16
    assert cfg.agent_train_extra_hop is False
    assert cfg.split_ratios == (0.6, 0.2, 0.2)
    assert cfg.widths() == (4, 3, 2)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_config_text("embed.dd = 4")


def test_bad_value_rejected():
    with pytest.raises(ConfigError, match="bad value"):
        parse_config_text("embed.d = many")


def test_bad_syntax_rejected():
    with pytest.raises(ConfigError, match="expected"):
        parse_config_text("[embed]")


def test_wrong_ratio_count_rejected():
    with pytest.raises(ConfigError, match="three fractions"):
        parse_config_text("split.ratios = 0.9,0.1")


def test_default_widths_follow_hops():
    assert parse_config_text("agent.max_hops_eval = 4").widths() == (25, 5, 5, 1)
    assert parse_config_text("agent.max_hops_eval = 5").widths() == (25, 5, 5, 5, 1)


def test_sub_config_construction():
    cfg = parse_config_text("embed.d = 12\nagent.hidden = 32\nsynth.n_learners = 50")
    assert cfg.embed_config(seed=7).d == 12
    assert cfg.embed_config(seed=7).seed == 7
    assert cfg.agent_config(seed=7).hidden == 32
    assert cfg.synth_config().n_learners == 50


def test_default_config_text_round_trips():
    text = default_config_text()
    cfg = parse_config_text(text)
    assert cfg == RunConfig()


def test_load_config_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("eval.k = 5\n", encoding="utf-8")
    assert load_config(str(path)).eval_k == 5
