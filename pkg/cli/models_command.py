from models.registry import MODELS, build_bundle


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("list-models", help="systèmes disponibles")
    parser.set_defaults(handler=handle)


def describe() -> list[str]:
    lines = []
    for name, entry in MODELS.items():
        bundle = build_bundle(name, entry.default_h)
        sys = bundle.system
        lines.append(f"{name}: n={sys.n} m={sys.m} h={entry.default_h:g} steps={entry.default_steps} - {entry.description}")
        if entry.default_params:
            lines.append("  params: " + ", ".join(f"{k}={v:g}" for k, v in entry.default_params.items()))
        if bundle.sections:
            lines.append("  sections: " + ", ".join(bundle.sections))
        if bundle.dla_constraints:
            lines.append("  dla_constraint: " + ", ".join(bundle.dla_constraints))
    return lines


def handle(args, overrides) -> int:
    print("\n".join(describe()))
    return 0
