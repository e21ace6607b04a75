import core
import textwrap

BUILTIN_HELP = """
== built in commands ==
help                    this help
shell                   interactive prompt, run several commands against one config
config                  show the merged experiment config (shell only)
exit                    leave the shell
""".strip()

FLAGS_HELP = """
== flags ==
--config FILE           YAML or JSON experiment config (default: config/experiment.yml)
--seed N                master seed
--out DIR               output directory for CSV tables and bundles
--trials N              independent trials, each with its own derived seed
--threads N             worker threads for trials
""".strip()

def module_help(name: str, instance) -> str:
    """one section per module: class docstring, then its commands"""
    lines = [f"{c.name:<23} {c.description}" for c in core.module.commands_of(instance)]
    if not lines:
        return ""

    header = f"== {name} =="
    doc = textwrap.dedent(type(instance).__doc__ or "").strip()
    if doc:
        header += f"\n{doc}\n"
    return header + "\n" + "\n".join(lines)

def get_help(manager):
    sections = [BUILTIN_HELP]
    sections += [s for s in (module_help(n, m) for n, m in manager.modules.items()) if s]
    sections.append(FLAGS_HELP)
    return "\n\n".join(sections)
