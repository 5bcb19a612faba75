"""Synthetic arithmetic reasoning corpus: generation, rendering, verification.

Every problem is a fully parenthesized integer expression. The reference
solution reduces it one operator at a time (innermost pair first, leftmost
on ties), one line per operator, and closes with a ``#### <answer>`` marker
line. Because arithmetic is exact, completions can be verified exactly and
the first wrong line of a model completion can be located exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import ConfigError, IoFailure, UnknownCharacter

# Single-character vocabulary: digits, operators, parens, '=', newline,
# the answer-marker '#', and space (used in the marker line).
CHARS = "0123456789+-*()=\n# "
SPECIALS = ("<pad>", "<bos>", "<eos>", "<sep>")

OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}

_REDUCIBLE = re.compile(r"\((-?\d+)([+\-*])(-?\d+)\)")
_SOLUTION_LINE = re.compile(r"^(-?\d+)([+\-*])(-?\d+)=(-?\d+)$")
_ANSWER_LINE = re.compile(r"^#### (-?\d+)$")


@dataclass(frozen=True)
class TokenizerSpec:
    """Character-level tokenizer with PAD/BOS/EOS/SEP specials.

    Token ids are positional in ``tokens`` and therefore stable for a given
    spec. BOS is reserved (present in the vocab, unused by the pipeline).
    """

    tokens: tuple[str, ...]

    @property
    def vocab_size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.tokens.index("<pad>")

    @property
    def bos_id(self) -> int:
        return self.tokens.index("<bos>")

    @property
    def eos_id(self) -> int:
        return self.tokens.index("<eos>")

    @property
    def sep_id(self) -> int:
        return self.tokens.index("<sep>")

    def char_to_id(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.tokens) if len(t) == 1}

    def fingerprint(self) -> str:
        payload = json.dumps(list(self.tokens), ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def tokenize(self, text: str) -> list[int]:
        table = self.char_to_id()
        out = []
        for pos, ch in enumerate(text):
            tid = table.get(ch)
            if tid is None:
                raise UnknownCharacter(ch, pos)
            out.append(tid)
        return out

    def detokenize(self, tokens) -> str:
        # Specials render as empty strings; plain text round-trips exactly.
        parts = []
        for tid in tokens:
            tok = self.tokens[int(tid)]
            if len(tok) == 1:
                parts.append(tok)
        return "".join(parts)


def default_tokenizer() -> TokenizerSpec:
    return TokenizerSpec(tokens=SPECIALS + tuple(CHARS))


@dataclass(frozen=True)
class ProblemInstance:
    expression: str
    gold_answer: int
    n_ops: int
    seed: int


@dataclass(frozen=True)
class CorpusConfig:
    n_train: int = 30000
    n_eval: int = 1000
    operand_range: tuple[int, int] = (1, 9)
    ops: tuple[str, ...] = ("+", "-", "*")
    n_ops_range: tuple[int, int] = (2, 6)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.operand_range
        olo, ohi = self.n_ops_range
        if self.n_train < 1 or self.n_eval < 0:
            raise ConfigError("n_train must be >= 1 and n_eval >= 0")
        if not (0 <= lo <= hi):
            raise ConfigError("operand_range must satisfy 0 <= lo <= hi")
        if not (2 <= olo <= ohi <= 6):
            raise ConfigError("n_ops_range must lie within [2, 6]")
        bad = set(self.ops) - set(OPS)
        if bad or not self.ops:
            raise ConfigError(f"ops must be a nonempty subset of +-*, got {self.ops!r}")
        object.__setattr__(self, "ops", tuple(sorted(set(self.ops))))


def evaluate_expression(expr: str) -> int:
    """Exact integer evaluation by recursive descent; the test oracle."""

    pos = 0

    def parse() -> int:
        nonlocal pos
        if pos < len(expr) and expr[pos] == "(":
            pos += 1
            left = parse()
            op = expr[pos]
            if op not in OPS:
                raise ValueError(f"bad operator {op!r} at {pos}")
            pos += 1
            right = parse()
            if pos >= len(expr) or expr[pos] != ")":
                raise ValueError(f"expected ')' at {pos}")
            pos += 1
            return OPS[op](left, right)
        m = re.match(r"-?\d+", expr[pos:])
        if not m:
            raise ValueError(f"expected integer at {pos}")
        pos += len(m.group(0))
        return int(m.group(0))

    value = parse()
    if pos != len(expr):
        raise ValueError(f"trailing input at {pos}")
    return value


def generate_problem(config: CorpusConfig, index: int) -> ProblemInstance:
    """Deterministic problem for (config.seed, index); total for index >= 0."""

    rng = np.random.default_rng(np.random.SeedSequence((config.seed, index)))
    lo, hi = config.operand_range
    olo, ohi = config.n_ops_range
    n_ops = int(rng.integers(olo, ohi + 1))

    def build(k: int) -> tuple[str, int]:
        if k == 0:
            v = int(rng.integers(lo, hi + 1))
            return str(v), v
        left_ops = int(rng.integers(0, k))
        op = config.ops[int(rng.integers(0, len(config.ops)))]
        ltext, lval = build(left_ops)
        rtext, rval = build(k - 1 - left_ops)
        return f"({ltext}{op}{rtext})", OPS[op](lval, rval)

    expression, value = build(n_ops)
    return ProblemInstance(expression=expression, gold_answer=value,
                           n_ops=n_ops, seed=config.seed)


def render_solution(problem: ProblemInstance) -> str:
    """Reduction chain, innermost-first left-to-right, one line per operator."""

    expr = problem.expression
    lines = []
    while True:
        m = _REDUCIBLE.search(expr)
        if m is None:
            break
        a, op, b = int(m.group(1)), m.group(2), int(m.group(3))
        c = OPS[op](a, b)
        lines.append(f"{a}{op}{b}={c}")
        expr = expr[: m.start()] + str(c) + expr[m.end():]
    final = int(expr)
    if final != problem.gold_answer:
        raise ValueError(
            f"expression {problem.expression!r} reduces to {final}, "
            f"gold_answer says {problem.gold_answer}")
    lines.append(f"#### {final}")
    return "\n".join(lines)


def verify_answer(problem: ProblemInstance, completion: str) -> bool:
    """True iff the last '#### <int>' line matches the gold answer."""

    last = None
    for line in completion.split("\n"):
        m = _ANSWER_LINE.match(line)
        if m:
            last = int(m.group(1))
    return last is not None and last == problem.gold_answer


def first_error_index(problem: ProblemInstance,
                      tokens,
                      tokenizer: Optional[TokenizerSpec] = None) -> Optional[int]:
    """Token index of the first wrong line of a completion, None if clean.

    Lines are checked locally and in order: a reduction line must satisfy
    its own arithmetic, a marker line must equal the gold answer (scanning
    stops at a correct marker). A completion whose lines are all correct
    but that never reaches a marker has no located error and returns None.
    """

    tok = tokenizer or default_tokenizer()
    tokens = [int(t) for t in tokens]
    if tokens and tokens[-1] == tok.eos_id:
        tokens = tokens[:-1]
    # Any remaining special token is itself malformed output.
    for i, t in enumerate(tokens):
        if len(tok.tokens[t]) != 1:
            return i
    text = "".join(tok.tokens[t] for t in tokens)

    start = 0
    pieces = text.split("\n")
    for j, line in enumerate(pieces):
        if j == len(pieces) - 1 and line == "":
            break  # trailing newline, not a line
        m = _SOLUTION_LINE.match(line)
        if m:
            a, op, b, c = int(m.group(1)), m.group(2), int(m.group(3)), int(m.group(4))
            if OPS[op](a, b) != c:
                return start
        else:
            m = _ANSWER_LINE.match(line)
            if m:
                if int(m.group(1)) == problem.gold_answer:
                    return None
                return start
            return start  # malformed line
        start += len(line) + 1
    return None


def iter_problems(config: CorpusConfig) -> Iterator[ProblemInstance]:
    """Unique-expression problem stream: scans indices upward, deduplicates.

    Train occupies the first n_train unique expressions, eval the next
    n_eval, which makes the two sets disjoint as strings by construction.
    """

    seen: set[str] = set()
    index = 0
    needed = config.n_train + config.n_eval
    while len(seen) < needed:
        p = generate_problem(config, index)
        index += 1
        if p.expression in seen:
            continue
        seen.add(p.expression)
        yield p


@dataclass
class Corpus:
    config: CorpusConfig
    train: list[ProblemInstance] = field(default_factory=list)
    eval: list[ProblemInstance] = field(default_factory=list)


def build_problems(config: CorpusConfig) -> Corpus:
    stream = iter_problems(config)
    train = [next(stream) for _ in range(config.n_train)]
    eval_ = [next(stream) for _ in range(config.n_eval)]
    return Corpus(config=config, train=train, eval=eval_)


def _write_jsonl(path: str, problems: list[ProblemInstance]) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            for p in problems:
                rec = {"expression": p.expression,
                       "gold_answer": p.gold_answer,
                       "solution_text": render_solution(p)}
                f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write corpus file {path}: {e}") from e


def build_corpus(config: CorpusConfig, out_dir: str) -> tuple[str, str]:
    """Write train.jsonl / eval.jsonl under out_dir; returns the two paths."""

    corpus = build_problems(config)
    os.makedirs(out_dir, exist_ok=True)
    train_path = os.path.join(out_dir, "train.jsonl")
    eval_path = os.path.join(out_dir, "eval.jsonl")
    _write_jsonl(train_path, corpus.train)
    _write_jsonl(eval_path, corpus.eval)
    return train_path, eval_path


def load_corpus_file(path: str, seed: int = 0) -> list[ProblemInstance]:
    """Read a corpus JSONL back into problem instances."""

    problems = []
    try:
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                expr = rec["expression"]
                problems.append(ProblemInstance(
                    expression=expr,
                    gold_answer=int(rec["gold_answer"]),
                    n_ops=expr.count("("),
                    seed=seed,
                ))
    except OSError as e:
        raise IoFailure(f"cannot read corpus file {path}: {e}") from e
    return problems


def problem_uid(problem: ProblemInstance) -> int:
    """Stable 63-bit id for RNG substream derivation (hash() is salted)."""

    digest = hashlib.sha256(problem.expression.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def encode_prompt(problem: ProblemInstance,
                  tokenizer: Optional[TokenizerSpec] = None) -> list[int]:
    """Prompt tokens: the expression followed by SEP."""

    tok = tokenizer or default_tokenizer()
    return tok.tokenize(problem.expression) + [tok.sep_id]


def encode_example(problem: ProblemInstance,
                   tokenizer: Optional[TokenizerSpec] = None) -> tuple[list[int], list[int]]:
    """(prompt tokens, full training sequence 'prompt SEP solution EOS')."""

    tok = tokenizer or default_tokenizer()
    prompt = encode_prompt(problem, tok)
    solution = tok.tokenize(render_solution(problem))
    return prompt, prompt + solution + [tok.eos_id]
