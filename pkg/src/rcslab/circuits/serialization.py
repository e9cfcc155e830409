"""Line-oriented text format for architectures and noise locations.

Grammar::

    file    := header NEWLINE layer{d}
    header  := n SP d SP layout SP seed        (seed is an integer or "-")
    layer   := pair (SP pair)* [SP "|" (SP site)*]
    pair    := site "-" site

The ``|`` section lists the sites dephased after that layer. It is present
on every layer line when a noise set was written and absent on all of them
otherwise, so "no noise set" and "empty noise set" round-trip distinctly.
Blank lines and lines starting with ``#`` are ignored.
"""

from rcslab.circuits.architecture import ArchitectureSpec, Layer
from rcslab.circuits.noise import NoiseLocationSet
from rcslab.core.errors import ValidationError
from rcslab.core.models import LayoutKind


def dumps_architecture(arch: ArchitectureSpec, noise: NoiseLocationSet | None = None) -> str:
    """Serialize an architecture and optional noise locations."""
    if noise is not None and (noise.n, noise.d) != (arch.n, arch.d):
        raise ValidationError("noise locations do not match the architecture")
    seed = "-" if arch.seed is None else str(arch.seed)
    lines = [f"{arch.n} {arch.d} {arch.layout_kind.value} {seed}"]
    for m, layer in enumerate(arch.layers):
        text = " ".join(f"{i}-{j}" for i, j in layer)
        if noise is not None:
            sites = " ".join(str(s) for s in sorted(noise.layers[m]))
            text = f"{text} |" + (f" {sites}" if sites else "")
        lines.append(text)
    return "\n".join(lines) + "\n"


def loads_architecture(text: str) -> tuple[ArchitectureSpec, NoiseLocationSet | None]:
    """Parse the text format back into an architecture and noise set."""
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise ValidationError("empty architecture text")
    header = lines[0].split()
    if len(header) != 4:
        raise ValidationError(f"bad header {lines[0]!r}: expected 'n d layout seed'")
    try:
        n, d = int(header[0]), int(header[1])
        layout = LayoutKind(header[2])
        seed = None if header[3] == "-" else int(header[3])
    except ValueError as e:
        raise ValidationError(f"bad header {lines[0]!r}: {e}") from e
    body = lines[1:]
    if len(body) != d:
        raise ValidationError(f"expected {d} layer lines, got {len(body)}")

    layers: list[Layer] = []
    noise_layers: list[frozenset[int]] = []
    with_noise = [("|" in line) for line in body]
    if any(with_noise) and not all(with_noise):
        raise ValidationError("noise section must appear on every layer line or none")
    for lineno, line in enumerate(body, start=2):
        pair_text, _, noise_text = line.partition("|")
        try:
            pairs = tuple(
                (int(a), int(b)) for a, b in (token.split("-") for token in pair_text.split())
            )
            sites = frozenset(int(s) for s in noise_text.split())
        except ValueError as e:
            raise ValidationError(f"line {lineno}: {e}") from e
        layers.append(pairs)
        noise_layers.append(sites)

    arch = ArchitectureSpec(n=n, d=d, layers=tuple(layers), layout_kind=layout, seed=seed)
    # A depth-0 file has no layer lines to carry the noise section.
    noise = NoiseLocationSet(n, d, tuple(noise_layers)) if body and all(with_noise) else None
    return arch, noise
