from dataclasses import dataclass, field

from core.errors import AlphabetError

# Классы символов хранятся битовыми масками по индексу символа в алфавите

PRINTABLE_CHARS = "".join(chr(code) for code in range(0x20, 0x7F)) + "\n"

NAMED_ALPHABETS = {
    "printable": PRINTABLE_CHARS,
    "printable-tab": PRINTABLE_CHARS + "\t",
}


@dataclass(frozen=True)
class Alphabet:
    """Конечный алфавит Σ"""
    chars: tuple
    name: str = field(default="custom", compare=False)
    index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        ordered = tuple(sorted(set(self.chars)))
        if not ordered:
            raise AlphabetError("alphabet must not be empty")
        object.__setattr__(self, "chars", ordered)
        object.__setattr__(self, "index", {ch: i for i, ch in enumerate(ordered)})

    @classmethod
    def from_text(cls, text, name="custom"):
        return cls(tuple(text), name=name)

    def __len__(self):
        return len(self.chars)

    def __contains__(self, ch):
        return ch in self.index

    @property
    def full_mask(self):
        return (1 << len(self.chars)) - 1

    def bit(self, ch):
        try:
            return 1 << self.index[ch]
        except KeyError:
            raise AlphabetError(f"character {ch!r} is not in alphabet {self.name}") from None

    def mask_of(self, chars):
        mask = 0
        for ch in chars:
            if ch in self.index:
                mask |= 1 << self.index[ch]
        return mask

    def range_mask(self, low, high):
        return self.mask_of(ch for ch in self.chars if low <= ch <= high)

    def chars_of(self, mask):
        return frozenset(ch for i, ch in enumerate(self.chars) if mask >> i & 1)

    def first_char(self, mask):
        """Наименьший символ класса"""
        if not mask:
            return None
        low = mask & -mask
        return self.chars[low.bit_length() - 1]

    def first_foreign(self, text):
        """Позиция первого символа вне алфавита или None"""
        for position, ch in enumerate(text):
            if ch not in self.index:
                return position
        return None

    def codes(self, text):
        index = self.index
        try:
            return [index[ch] for ch in text]
        except KeyError as e:
            raise AlphabetError(f"character {e.args[0]!r} is not in alphabet {self.name}") from None


DEFAULT_ALPHABET = Alphabet(tuple(PRINTABLE_CHARS), name="printable")


def resolve_alphabet(spec=None):
    """Алфавит по имени (printable, printable-tab) или по явному перечню символов"""
    if spec is None or spec == "printable":
        return DEFAULT_ALPHABET
    if isinstance(spec, Alphabet):
        return spec
    if spec in NAMED_ALPHABETS:
        return Alphabet(tuple(NAMED_ALPHABETS[spec]), name=spec)
    return Alphabet.from_text(spec, name=repr(spec))
