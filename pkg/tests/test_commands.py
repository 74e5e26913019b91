import itertools
import random

import pytest

from darkit.commands import (
    CommandRequest, ParamSpec, SearchSpace, expand_grid, render_command,
    validate_values,
)
from darkit.errors import ValidationError
from darkit.registry import TINY_SPIKE_GPT_SCHEMA

SCHEMA = TINY_SPIKE_GPT_SCHEMA


def req(values=None, mode="train"):
    return CommandRequest("tiny-spike-gpt", "wikitext", "gpt2-small",
                          values or {}, mode)


class TestValidateValues:
    def test_in_bounds(self):
        assert validate_values(SCHEMA, {"lr": 0.001}) == []

    def test_bounds_violation(self):
        out = validate_values(SCHEMA, {"lr": 2.0})
        assert len(out) == 1 and out[0]["code"] == "bounds"

    def test_unknown_name(self):
        out = validate_values(SCHEMA, {"foo": 1})
        assert out[0]["code"] == "unknown-name"

    def test_type_and_choice(self):
        assert validate_values(SCHEMA, {"batch_size": "x"})[0]["code"] == "type"
        assert validate_values(SCHEMA, {"optimizer": "rprop"})[0]["code"] == "choices"
        assert validate_values(SCHEMA, {"optimizer": "sgd"}) == []


class TestRender:
    def test_with_lr(self):
        assert render_command(req({"lr": 0.001}), SCHEMA) == \
            "darkit train tiny-spike-gpt --dataset wikitext --tokenizer gpt2-small --lr 0.001"

    def test_no_values(self):
        assert render_command(req(), SCHEMA) == \
            "darkit train tiny-spike-gpt --dataset wikitext --tokenizer gpt2-small"

    def test_flag(self):
        assert render_command(req({"verbose": True}), SCHEMA).endswith("--verbose")
        assert "--verbose" not in render_command(req({"verbose": False}), SCHEMA)

    def test_schema_declaration_order(self):
        cmd = render_command(req({"batch_size": 8, "lr": 0.01}), SCHEMA)
        assert cmd.index("--lr") < cmd.index("--batch_size")

    def test_invalid_rejected(self):
        with pytest.raises(ValidationError):
            render_command(req({"lr": 99.0}), SCHEMA)

    def test_float_shortest_roundtrip(self):
        cmd = render_command(req({"lr": 0.0001}), SCHEMA)
        assert cmd.endswith("--lr 0.0001")

    def test_injective_over_value_maps(self):
        rng = random.Random(5)
        seen = {}
        for _ in range(200):
            values = {}
            if rng.random() < 0.8:
                values["lr"] = rng.choice([0.1, 0.01, 0.001])
            if rng.random() < 0.8:
                values["batch_size"] = rng.choice([4, 8, 16])
            if rng.random() < 0.5:
                values["optimizer"] = rng.choice(["adam", "sgd"])
            cmd = render_command(req(values), SCHEMA)
            key = tuple(sorted(values.items()))
            if cmd in seen:
                assert seen[cmd] == key
            seen[cmd] = key


class TestGrid:
    def test_odometer_order(self):
        space = SearchSpace(req(), (("lr", (0.001, 0.0001)), ("batch_size", (8, 16))))
        cmds = expand_grid(space, SCHEMA)
        assert len(cmds) == 4
        assert cmds[0].endswith("--lr 0.001 --batch_size 8")
        assert cmds[1].endswith("--lr 0.001 --batch_size 16")
        assert cmds[2].endswith("--lr 0.0001 --batch_size 8")
        assert cmds[3].endswith("--lr 0.0001 --batch_size 16")

    def test_single_axis(self):
        space = SearchSpace(req(), (("batch_size", (4, 8, 16)),))
        assert len(expand_grid(space, SCHEMA)) == 3

    def test_zero_axes_yields_base(self):
        space = SearchSpace(req({"lr": 0.01}), ())
        cmds = expand_grid(space, SCHEMA)
        assert cmds == [render_command(req({"lr": 0.01}), SCHEMA)]

    def test_empty_axis_rejected(self):
        with pytest.raises(ValidationError):
            expand_grid(SearchSpace(req(), (("lr", ()),)), SCHEMA)

    def test_invalid_axis_value_rejected(self):
        with pytest.raises(ValidationError):
            expand_grid(SearchSpace(req(), (("lr", (5.0,)),)), SCHEMA)

    def test_count_and_order_match_bruteforce(self):
        rng = random.Random(99)
        axis_pool = {
            "lr": [0.1, 0.01, 0.001, 0.0001],
            "batch_size": [2, 4, 8, 16],
            "epochs": [1, 2, 3],
            "optimizer": ["adam", "sgd"],
        }
        for _ in range(50):
            names = rng.sample(list(axis_pool), rng.randint(1, 4))
            axes = tuple((n, tuple(rng.sample(axis_pool[n],
                                              rng.randint(1, len(axis_pool[n])))))
                         for n in names)
            cmds = expand_grid(SearchSpace(req(), axes), SCHEMA)
            combos = list(itertools.product(*(v for _, v in axes)))
            assert len(cmds) == len(combos)
            for cmd, combo in zip(cmds, combos):
                expected = render_command(req(dict(zip(names, combo))), SCHEMA)
                assert cmd == expected
