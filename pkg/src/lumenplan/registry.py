"""Name registries for scenarios, detector materials, heatmap formats, and other pluggable choices.

Everything the command line (or a configuration file) selects by name goes through a registry.
A registry normalizes names so that ``"SafetyScenario"``, ``"safety"``, and ``"SAFETY"`` all
resolve to the same element, keeps track of synonyms, and refuses conflicting registrations.

.. code-block:: python

    from lumenplan.registry import FunctionRegistry

    def midpoint_gap(low: float, high: float) -> float:
        return 0.5 * (low + high)

    def lower_gap(low: float, high: float) -> float:
        return low

    rule_registry = FunctionRegistry([midpoint_gap, lower_gap], default=midpoint_gap, suffix="gap")
    assert rule_registry.lookup("midpoint") is midpoint_gap
    assert rule_registry.lookup(None) is midpoint_gap
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Collection, Iterable, Iterator, Mapping
from functools import partial
from typing import TYPE_CHECKING, Any, Callable, Generic, Optional, TypeVar, Union

if TYPE_CHECKING:
    import click

__all__ = [
    # Type Hints
    "Hint",
    "OptionalKwargs",
    # Classes
    "BaseRegistry",
    "ClassRegistry",
    "FunctionRegistry",
    # Utilities
    "get_subclasses",
    "normalize_string",
    # Exceptions
    "RegistrationError",
    "RegistrationNameConflict",
    "RegistrationSynonymConflict",
]

logger = logging.getLogger(__name__)

X = TypeVar("X")
Y = TypeVar("Y")
F = TypeVar("F", bound=Callable[..., Any])

#: A name, an element, or ``None`` to fall back on the registry's default
Hint = Optional[Union[str, X]]
OptionalKwargs = Optional[Mapping[str, Any]]


def normalize_string(s: str, *, suffix: str | None = None) -> str:
    """Normalize a string for lookup.

    >>> normalize_string("Coverage-Scenario", suffix="scenario")
    'coverage'
    >>> normalize_string("lower_gap")
    'lowergap'
    """
    s = s.lower().replace("-", "").replace("_", "").replace(" ", "")
    if suffix is not None and s.endswith(suffix.lower()) and s != suffix.lower():
        return s[: -len(suffix)]
    return s.strip()


def get_subclasses(cls: type[X]) -> Iterable[type[X]]:
    """Get all public subclasses from the same top-level package as the ancestor.

    :param cls: The ancestor class
    :yields: Descendant classes of the ancestor class
    """
    package = cls.__module__.split(".")[0]
    for subclass in cls.__subclasses__():
        yield from get_subclasses(subclass)
        if subclass.__name__.startswith("_"):
            continue
        if subclass.__module__.split(".")[0] != package:
            continue
        yield subclass


def _make_callback(f: Callable[[X], Y]) -> Callable[[click.Context, click.Parameter, X], Y | None]:
    """Make a click-appropriate callback that passes missing values through."""

    def _callback(_ctx: click.Context, _param: click.Parameter, value: X) -> Y | None:
        if value is None:
            return None
        return f(value)

    return _callback


class RegistrationError(KeyError, Generic[X], ABC):
    """Raised when trying to add a new element to a registry with a pre-existing lookup key."""

    def __init__(self, registry: BaseRegistry[X, Any], key: str, proposed: X, label: str):
        """Initialize the registration error.

        :param registry: The registry where the registration error occurred
        :param key: The key (either in the ``lookup_dict`` or ``synonyms``) where the conflict occurred
        :param proposed: The proposed overwrite on the given key
        :param label: The origin of the error (either "name" or "synonym")
        """
        self.registry = registry
        self.key = key
        self.proposed = proposed
        self.label = label
        self.existing = self._get_existing()

    @abstractmethod
    def _get_existing(self) -> X:
        """Get the pre-existing element based on the error type and the given key."""

    def __str__(self) -> str:
        """Coerce the registration error to a string."""
        return (
            f"Conflict on registration of {self.label} {self.key}:\n"
            f"Existing: {self.existing}\n"
            f"Proposed: {self.proposed}"
        )


class RegistrationNameConflict(RegistrationError[X]):
    """Raised on a conflict with the lookup dict."""

    def _get_existing(self) -> X:
        return self.registry.lookup_dict[self.key]


class RegistrationSynonymConflict(RegistrationError[X]):
    """Raised on a conflict with the synonym dict."""

    def _get_existing(self) -> X:
        return self.registry.synonyms[self.key]


class BaseRegistry(ABC, Generic[X, Y]):
    """A registry of named elements.

    This class is parametrized by two variables:

    - ``X`` is the type of element in the registry
    - ``Y`` is the type that gets made by the ``make`` function. This is
      the same as ``X`` for materials and functions, and an instance of ``X``
      for the class registry.
    """

    default: X | None
    #: The mapping from normalized synonyms to the elements
    synonyms: dict[str, X]
    #: The mapping from normalized names to the elements
    lookup_dict: dict[str, X]
    #: The shared suffix of all element names, dropped on normalization
    suffix: str | None

    def __init__(
        self,
        elements: Iterable[X] | None = None,
        *,
        default: X | None = None,
        synonyms: Mapping[str, X] | None = None,
        suffix: str | None = None,
    ):
        """Initialize the registry.

        :param elements: The elements to register
        :param default: The optional default element
        :param synonyms: The optional synonym dictionary
        :param suffix: The optional shared suffix of all element names
        """
        self.default = default
        self.suffix = suffix
        self.lookup_dict = {}
        self.synonyms = {}
        for key, value in (synonyms or {}).items():
            self.synonyms[self.normalize(key)] = value
        if elements is not None:
            for element in elements:
                self.register(element)

    def __iter__(self) -> Iterator[X]:
        """Iterate over the registered elements in registration order."""
        return iter(self.lookup_dict.values())

    def __len__(self) -> int:
        return len(self.lookup_dict)

    @property
    def options(self) -> set[str]:
        """Return the normalized option names, including synonyms."""
        return set(self.lookup_dict.keys()).union(self.synonyms.keys())

    @abstractmethod
    def extract_name(self, element: X) -> str:
        """Get the name for an element."""

    def extract_synonyms(self, element: X) -> Collection[str]:
        """Get synonyms from an element."""
        return []

    def normalize(self, s: str) -> str:
        """Normalize the string with this registry's suffix."""
        return normalize_string(s, suffix=self.suffix)

    def normalize_element(self, element: X) -> str:
        """Get the normalized key of a registered element."""
        return self.normalize(self.extract_name(element))

    def register(
        self,
        element: X,
        synonyms: Iterable[str] | None = None,
        raise_on_conflict: bool = True,
    ) -> None:
        """Register an additional element with this registry.

        :param element: The element to register
        :param synonyms: An optional iterable of synonyms to add for the element
        :param raise_on_conflict: Determines the behavior when a conflict is encountered on either
            the normalized element name or a synonym. If true, will raise an exception. If false, will
            simply disregard the entry.

        :raises RegistrationNameConflict: If ``raise_on_conflict`` is true
            and there's a conflict with the lookup dict
        :raises RegistrationSynonymConflict: If ``raise_on_conflict`` is true
            and there's a conflict with the synonym dict
        :raises ValueError: If any given synonyms are empty strings
        """
        key = self.normalize_element(element)
        if key not in self.lookup_dict and key not in self.synonyms:
            self.lookup_dict[key] = element
        elif key in self.lookup_dict and raise_on_conflict:
            raise RegistrationNameConflict(self, key, element, label="name")
        elif key in self.synonyms and raise_on_conflict:
            raise RegistrationSynonymConflict(self, key, element, label="name")

        _synonyms = set(synonyms or [])
        _synonyms.update(self.extract_synonyms(element))

        for synonym in sorted(_synonyms):
            synonym_key = self.normalize(synonym)
            if not synonym_key:
                raise ValueError(f"Tried to use empty synonym for {element}")
            if synonym_key not in self.synonyms and synonym_key not in self.lookup_dict:
                self.synonyms[synonym_key] = element
            elif synonym_key in self.lookup_dict and raise_on_conflict:
                raise RegistrationNameConflict(self, synonym_key, element, label="synonym")
            elif synonym_key in self.synonyms and raise_on_conflict:
                raise RegistrationSynonymConflict(self, synonym_key, element, label="synonym")

    def _lookup_string(self, query: str) -> X:
        key = self.normalize(query)
        if key in self.lookup_dict:
            return self.lookup_dict[key]
        if key in self.synonyms:
            return self.synonyms[key]
        valid_choices = sorted(self.lookup_dict)
        raise KeyError(f"Invalid name: {query} (normalized to: {key}). Valid choices are: {valid_choices}")

    def _default(self, default: Hint[X] = None) -> X:
        if default is not None:
            if isinstance(default, str):
                return self._lookup_string(default)
            return default
        elif self.default is not None:
            return self.default
        else:
            raise ValueError("no default given either from registry or explicitly")

    @abstractmethod
    def lookup(self, query: Hint[X], default: X | None = None) -> X:
        """Lookup an element."""

    @abstractmethod
    def make(self, query: Hint[X], pos_kwargs: OptionalKwargs = None, **kwargs: Any) -> Y:
        """Make an element."""

    def docdata(self, query: Hint[X], *path: str, default: X | None = None) -> Any:
        """Lookup an element and get its docdata.

        :param query: The hint for looking something up in the registry
            passed to :func:`lookup`
        :param path: An optional path for traversing the resulting docdata
            dictionary
        :param default: The default value to pass to :func:`lookup`
        :returns: The optional docdata retrieved with :func:`docdata.get_docdata`
        """
        from docdata import get_docdata

        x = self.lookup(query, default=default)
        rv = get_docdata(x)
        for part in path:
            rv = rv[part]
        return rv

    def get_option(
        self,
        *flags: str,
        default: Hint[X] = None,
        as_string: bool = False,
        required: bool = False,
        **kwargs: Any,
    ) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
        """Get a click option whose choices are the keys of this registry.

        :param flags: The flags passed to :func:`click.option`
        :param default: The default element. If not given, the option is left unset
            when it isn't passed, so that a configuration file can still decide.
        :param as_string: If true, pass the normalized key through instead of the looked-up element
        :param required: Is the option required?
        :param kwargs: Additional keyword arguments passed to :func:`click.option`
        :returns: A click option decorator
        """
        import click

        key = None if default is None else self.normalize_element(self._default(default))
        return click.option(
            *flags,
            type=click.Choice(sorted(self.lookup_dict), case_sensitive=False),
            default=key,
            show_default=key is not None,
            callback=None if as_string else _make_callback(self.lookup),
            required=required,
            **kwargs,
        )


class FunctionRegistry(BaseRegistry[F, F]):
    """A registry for functions."""

    def extract_name(self, element: F) -> str:
        """Get the name for an element."""
        return element.__name__

    def lookup(self, query: Hint[F], default: F | None = None) -> F:
        """Lookup a function."""
        if query is None:
            return self._default(default)
        elif isinstance(query, str):
            return self._lookup_string(query)
        elif callable(query):
            return query
        else:
            raise TypeError(f"Invalid function: {type(query)} - {query}")

    def make(self, query: Hint[F], pos_kwargs: OptionalKwargs = None, **kwargs: Any) -> F:
        """Make a function with partial bindings to the given kwargs."""
        func: F = self.lookup(query)
        if pos_kwargs or kwargs:
            return partial(func, **(pos_kwargs or {}), **kwargs)  # type: ignore
        return func


class ClassRegistry(BaseRegistry[type[X], X]):
    """A registry for subclasses of a shared base class."""

    #: The base class
    base: type[X]

    def __init__(
        self,
        classes: Collection[type[X]] | None = None,
        *,
        base: type[X],
        default: type[X] | None = None,
        suffix: str | None = None,
        synonym_attribute: str | None = "synonyms",
    ) -> None:
        """Initialize the registry.

        :param classes: A list of classes
        :param base: The base class
        :param default: The default class
        :param suffix: The shared suffix of all class names. Defaults to the base class' name.
        :param synonym_attribute: The attribute to look in each class for synonyms. Explicitly set to None
            to turn off synonym lookup.
        """
        self.base = base
        self.synonym_attribute = synonym_attribute
        super().__init__(
            elements=sorted(classes or [], key=lambda cls: cls.__name__),
            default=default,
            suffix=normalize_string(base.__name__) if suffix is None else suffix,
        )

    def extract_name(self, element: type[X]) -> str:
        """Get the name for an element."""
        return element.__name__

    def extract_synonyms(self, element: type[X]) -> Collection[str]:
        """Get synonyms from an element."""
        if not self.synonym_attribute:
            return []
        return getattr(element, self.synonym_attribute, None) or []

    @classmethod
    def from_subclasses(cls, base: type[X], **kwargs: Any) -> ClassRegistry[X]:
        """Make a registry from the public subclasses of a given class.

        :param base: The base class whose subclasses will be indexed
        :param kwargs: remaining keyword arguments to pass to :func:`ClassRegistry.__init__`
        :return: A registry instance
        """
        return cls(set(get_subclasses(base)), base=base, **kwargs)

    def lookup(self, query: Hint[type[X]], default: type[X] | None = None) -> type[X]:
        """Lookup a class."""
        if query is None:
            return self._default(default)
        elif isinstance(query, str):
            return self._lookup_string(query)
        elif isinstance(query, self.base):
            return query.__class__
        elif isinstance(query, type) and issubclass(query, self.base):
            return query
        raise TypeError(f"Not subclass of {self.base.__name__}: {query}")

    def make(self, query: Hint[type[X]], pos_kwargs: OptionalKwargs = None, **kwargs: Any) -> X:
        """Instantiate a class with optional kwargs."""
        if isinstance(query, self.base):
            return query
        cls = self.lookup(query)
        return cls(**(pos_kwargs or {}), **kwargs)
