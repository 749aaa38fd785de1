"""Run configuration: stack + emitter + measurement settings.

Also provides the built-in stack constructors used by the shipped
presets: an Al-mirror cavity with a variable oxide spacer under an 80-nm
emitter flake, and the plain oxide-on-silicon reference substrate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .dipole import EmitterSpec, QuadratureSpec
from .enhance import SpectrumWeight
from .materials import Material, builtin
from .tmm import Layer, Stack

__all__ = [
    "RunConfig",
    "cavity_stack",
    "reference_stack",
    "default_emitter",
    "set_parameter",
]

DEFAULT_FLAKE_NM = 80.0
DEFAULT_ETA0 = 0.05


@dataclass(frozen=True)
class RunConfig:
    stack: Stack
    ref_stack: Stack
    emitter: EmitterSpec
    ref_emitter: EmitterSpec
    weight: SpectrumWeight = field(default_factory=SpectrumWeight.flat)
    na: float = 0.9
    pump_wavelength_nm: float = 532.0
    n_samples: int = 31
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if not 0.0 < self.na <= 1.0:
            raise ValueError(f"NA must be in (0, 1], got {self.na}")
        for stack, emitter, tag in ((self.stack, self.emitter, "stack"),
                                    (self.ref_stack, self.ref_emitter,
                                     "reference stack")):
            if not 0 <= emitter.host_layer < len(stack.layers):
                raise ValueError(
                    f"{tag}: host_layer {emitter.host_layer} out of range"
                )
            host = stack.layers[emitter.host_layer]
            if emitter.depth_in_layer_nm > host.thickness_nm:
                raise ValueError(
                    f"{tag}: emitter depth {emitter.depth_in_layer_nm} nm "
                    f"exceeds host thickness {host.thickness_nm} nm"
                )


def cavity_stack(spacer_nm: float, flake_nm: float = DEFAULT_FLAKE_NM,
                 materials: dict[str, Material] | None = None) -> Stack:
    """Si / 285-nm SiO2 / 115-nm Al / 5-nm Al2O3 / spacer SiO2 / flake.

    spacer_nm = 0 omits the spacer layer entirely.
    """
    m = materials or {}
    get = lambda name: m.get(name, builtin(name))
    layers = [
        Layer(get("sio2"), 285.0),
        Layer(get("al"), 115.0),
        Layer(get("al2o3"), 5.0),
    ]
    if spacer_nm > 0:
        layers.append(Layer(get("sio2"), float(spacer_nm)))
    layers.append(Layer(get("hbn"), float(flake_nm)))
    return Stack(below=get("si"), layers=tuple(layers), above=get("air"))


def reference_stack(flake_nm: float = DEFAULT_FLAKE_NM,
                    materials: dict[str, Material] | None = None) -> Stack:
    """Si / 285-nm SiO2 / flake: the bare oxide-on-silicon substrate."""
    m = materials or {}
    get = lambda name: m.get(name, builtin(name))
    layers = (Layer(get("sio2"), 285.0), Layer(get("hbn"), float(flake_nm)))
    return Stack(below=get("si"), layers=layers, above=get("air"))


def default_emitter(stack: Stack, orientation: str = "in_plane_average",
                    eta0: float = DEFAULT_ETA0) -> EmitterSpec:
    """Emitter at mid-depth of the topmost layer (the flake)."""
    host = len(stack.layers) - 1
    return EmitterSpec(
        host_layer=host,
        depth_in_layer_nm=stack.layers[host].thickness_nm / 2.0,
        orientation=orientation,
        quantum_efficiency_eta0=eta0,
    )


_PARAM_RE = re.compile(r"^layers\[(\d+)\]\.thickness_nm$")


def set_parameter(config: RunConfig, parameter_path: str, value: float) -> RunConfig:
    """New config with one swept parameter changed.

    Supported paths: ``layers[i].thickness_nm`` (i indexes config.stack
    bottom-to-top).  A value of 0 removes the layer; the emitter's host
    index is shifted accordingly.
    """
    m = _PARAM_RE.match(parameter_path)
    if not m:
        raise ValueError(
            f"unsupported parameter path {parameter_path!r}; expected "
            "'layers[i].thickness_nm'"
        )
    i = int(m.group(1))
    layers = list(config.stack.layers)
    if not 0 <= i < len(layers):
        raise ValueError(f"layer index {i} out of range")
    if value < 0:
        raise ValueError("thickness must be >= 0")
    emitter = config.emitter
    if value == 0:
        if emitter.host_layer == i:
            raise ValueError("cannot remove the emitter's host layer")
        del layers[i]
        if emitter.host_layer > i:
            emitter = replace(emitter, host_layer=emitter.host_layer - 1)
    else:
        layers[i] = Layer(layers[i].material, float(value))
    stack = Stack(config.stack.below, tuple(layers), config.stack.above)
    return replace(config, stack=stack, emitter=emitter)
