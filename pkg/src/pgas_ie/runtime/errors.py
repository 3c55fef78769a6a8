from __future__ import annotations


class RuntimeAbort(Exception):
    """A simulated program aborted; carries the site/array involved."""


class OutOfBounds(RuntimeAbort):
    def __init__(self, what: str, index):
        self.what = what
        self.index = index
        super().__init__(f"index {index!r} is out of bounds for {what}")


class ScheduleMismatch(RuntimeAbort):
    def __init__(self, site: int, locale: int, index: int):
        self.site = site
        super().__init__(
            f"site {site}: remote index {index} accessed from locale {locale} "
            "is missing from a fresh communication schedule")


class RaceError(RuntimeAbort):
    def __init__(self, what: str, index):
        super().__init__(f"two forall iterations write {what}[{index}]")


class DivisionByZero(RuntimeAbort):
    pass
