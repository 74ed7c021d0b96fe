from __future__ import annotations

from fractions import Fraction
from typing import Any

from django import forms

from .formats import DocumentError, read_document
from .geometry import Point
from .kernel import DISTORTIONS
from .labels import LabelError, LabelSpace
from .scalar import RationalFormatError, parse_rational
from .simulator import MODELS, Scenario, ScenarioError
from .sweeps import START_OFFSETS, SweepSpec

MODEL_CHOICES = [(model, model) for model in MODELS]


def _rational(value: Any) -> Fraction:
    if isinstance(value, float):
        raise RationalFormatError(f"use texto racional em vez de numero decimal: {value!r}")
    return parse_rational(value)


class RationalField(forms.Field):
    default_error_messages = {"invalid": "%(detail)s"}

    def __init__(self, *, min_value: Fraction | None = None, strict_min: bool = False, **kwargs):
        self.min_value = min_value
        self.strict_min = strict_min
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return None
        try:
            return _rational(value)
        except RationalFormatError as exc:
            raise forms.ValidationError(self.error_messages["invalid"], code="invalid", params={"detail": str(exc)})

    def validate(self, value):
        super().validate(value)
        if value is None or self.min_value is None:
            return
        if value < self.min_value or (self.strict_min and value == self.min_value):
            comparison = ">" if self.strict_min else ">="
            raise forms.ValidationError(f"precisa ser {comparison} {self.min_value}", code="min_value")


class PointField(forms.Field):
    """Pair of rational coordinates ``[x, y]``; errors name the component index."""

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise forms.ValidationError("esperada uma lista [x, y]", code="invalid")
        coordinates = []
        errors = []
        for index, component in enumerate(value):
            try:
                coordinates.append(_rational(component))
            except RationalFormatError as exc:
                errors.append(
                    forms.ValidationError("%(detail)s", code="component", params={"index": index, "detail": str(exc)})
                )
        if errors:
            raise forms.ValidationError(errors)
        return Point(*coordinates)


class RationalListField(forms.Field):
    def __init__(self, *, min_value: Fraction | None = None, **kwargs):
        self.min_value = min_value
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if not isinstance(value, (list, tuple)) or not value:
            raise forms.ValidationError("esperada uma lista nao vazia", code="invalid")
        items = []
        errors = []
        for index, component in enumerate(value):
            try:
                item = _rational(component)
            except RationalFormatError as exc:
                errors.append(forms.ValidationError("%(detail)s", code="component", params={"index": index, "detail": str(exc)}))
                continue
            if self.min_value is not None and item <= self.min_value:
                errors.append(
                    forms.ValidationError(
                        "%(detail)s", code="component", params={"index": index, "detail": f"precisa ser > {self.min_value}"}
                    )
                )
            items.append(item)
        if errors:
            raise forms.ValidationError(errors)
        return tuple(items)


class IntegerListField(forms.Field):
    def __init__(self, *, min_value: int = 0, **kwargs):
        self.min_value = min_value
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if not isinstance(value, (list, tuple)) or not value:
            raise forms.ValidationError("esperada uma lista nao vazia", code="invalid")
        errors = []
        for index, item in enumerate(value):
            if isinstance(item, bool) or not isinstance(item, int) or item < self.min_value:
                errors.append(
                    forms.ValidationError(
                        "%(detail)s",
                        code="component",
                        params={"index": index, "detail": f"esperado inteiro >= {self.min_value}"},
                    )
                )
        if errors:
            raise forms.ValidationError(errors)
        return tuple(value)


class DocumentFormMixin:
    """Forms fed with a parsed JSON object instead of POST data."""

    def _check_unknown_fields(self) -> None:
        unknown = sorted(set(self.data) - set(self.fields))
        for name in unknown:
            self.add_error(None, f"{name}: campo desconhecido")

    def error_lines(self) -> list[str]:
        lines = []
        for name, errors in self.errors.as_data().items():
            for error in errors:
                for item in error.error_list:
                    if item.code == "component":
                        lines.append(f"{name}[{item.params['index']}]: {item.params['detail']}")
                    elif name == "__all__":
                        lines.append(" ".join(item.messages))
                    else:
                        lines.append(f"{name}: {' '.join(item.messages)}")
        return lines


class ScenarioForm(DocumentFormMixin, forms.Form):
    model = forms.ChoiceField(choices=MODEL_CHOICES)
    L = forms.IntegerField(min_value=2)
    label_a = forms.IntegerField(min_value=0)
    label_b = forms.IntegerField(min_value=0)
    pos_a = PointField()
    pos_b = PointField()
    start_a = RationalField(required=False, min_value=Fraction(0))
    start_b = RationalField(required=False, min_value=Fraction(0))
    rho = RationalField(required=False, min_value=Fraction(1), strict_min=True)
    time_budget = RationalField(required=False, min_value=Fraction(0), strict_min=True)
    distortion = forms.ChoiceField(required=False, choices=[(name, name) for name in DISTORTIONS])
    strict_loop_guard = forms.BooleanField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        self._check_unknown_fields()
        size = cleaned_data.get("L")
        for name in ("label_a", "label_b"):
            label = cleaned_data.get(name)
            if size is not None and label is not None and label >= size:
                self.add_error(name, f"rotulo precisa estar em [0, {size - 1}]")
        if cleaned_data.get("label_a") is not None and cleaned_data.get("label_a") == cleaned_data.get("label_b"):
            self.add_error("label_b", "os agentes precisam de rotulos diferentes")
        model = cleaned_data.get("model")
        if model == "binary" and cleaned_data.get("rho") is None and "rho" not in self.errors:
            self.add_error("rho", "o modelo binario exige rho > 1")
        if model == "binary" and cleaned_data.get("distortion") not in (None, "", "identity"):
            self.add_error("distortion", "distorcoes so se aplicam ao modelo monotono")
        if model == "binary" and cleaned_data.get("strict_loop_guard") and size is not None and size < 3:
            self.add_error("strict_loop_guard", "a guarda estrita (i < lambda) exige L >= 3")
        return cleaned_data

    def scenario(self) -> Scenario:
        """Build the validated scenario; call only after ``is_valid()``."""
        data = self.cleaned_data
        try:
            return Scenario(
                model=data["model"],
                space=LabelSpace.from_size(data["L"]),
                label_a=data["label_a"],
                label_b=data["label_b"],
                pos_a=data["pos_a"],
                pos_b=data["pos_b"],
                start_a=data.get("start_a") or Fraction(0),
                start_b=data.get("start_b") or Fraction(0),
                rho=data.get("rho") if data["model"] == "binary" else None,
                distortion=data.get("distortion") or "identity",
                time_budget=data.get("time_budget"),
                strict_loop_guard=data.get("strict_loop_guard", False),
            )
        except (ScenarioError, LabelError) as exc:
            raise forms.ValidationError(str(exc)) from exc


class SweepSpecForm(DocumentFormMixin, forms.Form):
    seed = forms.IntegerField(min_value=0, max_value=2**64 - 1)
    count = forms.IntegerField(min_value=1)
    model = forms.ChoiceField(choices=MODEL_CHOICES)
    L_grid = IntegerListField(required=False, min_value=2)
    D_min = RationalField(required=False, min_value=Fraction(1), strict_min=True)
    D_max = RationalField(required=False, min_value=Fraction(1), strict_min=True)
    rho_grid = RationalListField(required=False, min_value=Fraction(1))
    start_offset = forms.ChoiceField(required=False, choices=[(name, name) for name in START_OFFSETS])
    offset = RationalField(required=False, min_value=Fraction(0))
    max_denominator = forms.IntegerField(required=False, min_value=1)
    probe_lambdas = IntegerListField(required=False, min_value=1)
    probe_rho = RationalField(required=False, min_value=Fraction(4))
    out_of_contract = forms.BooleanField(required=False)
    distortion = forms.ChoiceField(required=False, choices=[(name, name) for name in DISTORTIONS])
    small_every = forms.IntegerField(required=False, min_value=0)
    strict_loop_guard = forms.BooleanField(required=False)

    def __init__(self, *args, **kwargs):
        self.default_max_denominator = kwargs.pop("default_max_denominator", 2**16)
        super().__init__(*args, **kwargs)

    def clean(self):
        cleaned_data = super().clean()
        self._check_unknown_fields()
        d_min, d_max = cleaned_data.get("D_min"), cleaned_data.get("D_max")
        if d_min is not None and d_max is not None and d_min > d_max:
            self.add_error("D_max", "D_max precisa ser >= D_min")
        if cleaned_data.get("out_of_contract") and cleaned_data.get("model") != "binary":
            self.add_error("out_of_contract", "cenarios fora de contrato so existem no modelo binario")
        if cleaned_data.get("strict_loop_guard") and 2 in (cleaned_data.get("L_grid") or ()):
            self.add_error("L_grid", "a guarda estrita (i < lambda) exige L >= 3")
        return cleaned_data

    def spec(self) -> SweepSpec:
        data = self.cleaned_data
        values: dict[str, Any] = {
            "seed": data["seed"],
            "count": data["count"],
            "model": data["model"],
            "max_denominator": data.get("max_denominator") or self.default_max_denominator,
            "out_of_contract": data.get("out_of_contract", False),
            "strict_loop_guard": data.get("strict_loop_guard", False),
        }
        for name in ("L_grid", "D_min", "D_max", "rho_grid", "start_offset", "offset", "probe_lambdas", "probe_rho", "distortion", "small_every"):
            if data.get(name) not in (None, ""):
                values[name] = data[name]
        return SweepSpec(**values)


class InputError(Exception):
    """Rejected input document; ``lines`` holds one diagnostic per problem."""

    def __init__(self, source: str, lines: list[str]) -> None:
        self.source = source
        self.lines = lines
        super().__init__(f"{source}: " + "; ".join(lines))


def load_scenario(path: str) -> Scenario:
    try:
        document = read_document(path)
    except DocumentError as exc:
        raise InputError(path, [str(exc)]) from exc
    form = ScenarioForm(data=document)
    if not form.is_valid():
        raise InputError(path, form.error_lines())
    try:
        return form.scenario()
    except forms.ValidationError as exc:
        raise InputError(path, exc.messages) from exc


def load_sweep_spec(
    path: str, *, default_max_denominator: int = 2**16, overrides: dict[str, Any] | None = None
) -> SweepSpec:
    """Validated sweep spec; command-line ``overrides`` go through the same form checks as the file."""
    try:
        document = read_document(path)
    except DocumentError as exc:
        raise InputError(path, [str(exc)]) from exc
    if overrides:
        document = {**document, **overrides}
    form = SweepSpecForm(data=document, default_max_denominator=default_max_denominator)
    if not form.is_valid():
        raise InputError(path, form.error_lines())
    return form.spec()
