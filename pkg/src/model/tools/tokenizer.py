"""Tokenizer.

This module contains Lexer, a RegexpTokenizer for the surface
language of programs and stub files.
- Skip `(* ... *)` comments without losing positions.
- Classify tokens as numbers, identifiers, keywords or symbols.
- Attach a line/column span to every token.
"""
import re
from bisect import bisect_right
from dataclasses import dataclass

from nltk.tokenize import RegexpTokenizer

from model.ast import Span
from model.errors import ParseError

KEYWORDS = {
    "let", "rec", "in", "fun", "if", "then", "else", "val", "forall",
    "true", "false", "not", "assert",
}

TOKEN_PATTERN = (
    r"\d+"
    r"|[A-Za-z_][\w']*(?:\.[A-Za-z_][\w']*)*"
    r"|->|::|;;|&&|\|\||<>|!=|<=|>="
    r"|\S"
)

_COMMENT = re.compile(r"\(\*.*?\*\)", re.DOTALL)


@dataclass(frozen=True)
class Token:
    kind: str       # NUM, IDENT, KW, SYM or EOF
    text: str
    span: Span

    def __str__(self):
        return self.text if self.kind != "EOF" else "end of input"


class Lexer(RegexpTokenizer):
    """
    RegexpTokenizer producing `Token` objects.
    """

    def __init__(self):
        RegexpTokenizer.__init__(self, TOKEN_PATTERN)

    def lex(self, text):
        # type: (str) -> list[Token]
        """
        Split `text` into tokens, ending with an EOF token.

        Raises:
            `ParseError`: A comment is left open.
        """
        cleaned = _COMMENT.sub(lambda m: re.sub(r"[^\n]", " ", m.group(0)), text)
        if "(*" in cleaned:
            start = cleaned.index("(*")
            raise ParseError("unterminated comment", self._span(text, start))
        starts = [0] + [m.end() for m in re.finditer(r"\n", text)]
        tokens = []
        for begin, end in self.span_tokenize(cleaned):
            word = cleaned[begin:end]
            tokens.append(Token(self._kind(word), word, self._position(starts, begin)))
        tokens.append(Token("EOF", "", self._position(starts, len(text))))
        return tokens

    @staticmethod
    def _kind(word):
        if word.isdigit():
            return "NUM"
        if word in KEYWORDS:
            return "KW"
        if word[0].isalpha() or word[0] == "_":
            return "IDENT"
        return "SYM"

    @staticmethod
    def _position(starts, offset):
        line = bisect_right(starts, offset)
        return Span(line, offset - starts[line - 1] + 1)

    def _span(self, text, offset):
        starts = [0] + [m.end() for m in re.finditer(r"\n", text)]
        return self._position(starts, offset)

    def identifiers(self, text):
        """Every identifier spelled in `text`."""
        return {t.text for t in self.lex(text) if t.kind == "IDENT"}
