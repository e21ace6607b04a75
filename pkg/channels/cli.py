import core
import os
import sys
import json
import argparse
import prompt_toolkit
import prompt_toolkit.patch_stdout
import prompt_toolkit.history
import prompt_toolkit.styles
import prompt_toolkit.formatted_text
import prompt_toolkit.shortcuts
import prompt_toolkit.completion

def build_parser():
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="chaotic quantum diffusion experiments",
    )
    parser.add_argument("command", nargs="?", default="help", help="forward, train, sample, evaluate, noise_sweep, qae, help or shell")
    parser.add_argument("--config", default=None, help="YAML or JSON experiment config")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--trials", type=int, default=None, help="number of trials")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    return parser

def overrides(args) -> dict:
    return {"seed": args.seed, "out": args.out, "trials": args.trials, "threads": args.threads}

class Cli(core.channel.Channel):
    running = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._setup_style()

    def _setup_style(self):
        self.style = prompt_toolkit.styles.Style.from_dict({
            "prompt": "ansicyan bold",
            "error": "ansired bold",
            "status": "ansiblue",
            "warning": "ansiyellow bold",
        })

    def _setup_history(self):
        history_dir = core.get_data_path()
        os.makedirs(history_dir, exist_ok=True)
        self.history = prompt_toolkit.history.FileHistory(os.path.join(history_dir, "cli_history"))

    def _get_prompt(self):
        return prompt_toolkit.formatted_text.HTML("<prompt>chaosdiff</prompt>> ")

    def _print_formatted(self, text, style_class=None):
        if style_class and sys.stdout.isatty():
            formatted = prompt_toolkit.formatted_text.HTML(
                f"<{style_class}>{prompt_toolkit.formatted_text.html.html_escape(text)}</{style_class}>"
            )
            prompt_toolkit.shortcuts.print_formatted_text(formatted, style=self.style)
        else:
            print(text, flush=True)

    def show(self, result):
        if result is None:
            return
        content = result.get("content", "")
        if isinstance(content, (dict, list)):
            content = json.dumps(content, indent=1)
        self._print_formatted(str(content), None if result.get("status") == "success" else "error")

    async def run_once(self, command: str) -> int:
        """run a single command, returns the process exit status"""
        result = await self.send(command)
        self.show(result)
        return 0 if result and result.get("status") == "success" else 1

    async def run(self):
        """interactive shell"""
        if not sys.stdin.isatty():
            await self._announce("the shell needs an interactive terminal", "error")
            return False

        self._setup_history()
        commands = sorted(set(core.module._command_registry) | {"help", "config", "exit"})
        prompt_session = prompt_toolkit.PromptSession(
            history=self.history,
            style=self.style,
            multiline=False,
            completer=prompt_toolkit.completion.WordCompleter(commands),
            search_ignore_case=True,
        )

        with prompt_toolkit.patch_stdout.patch_stdout():
            while self.running:
                try:
                    msg = await prompt_session.prompt_async(self._get_prompt())
                except (EOFError, KeyboardInterrupt):
                    break

                msg = msg.strip()
                if not msg:
                    continue
                if msg in ("exit", "quit"):
                    break
                if msg == "config":
                    self._print_formatted(json.dumps(self.manager.config.data, indent=1), "status")
                    continue
                name = msg.split()[0]
                if name != "help" and not self.manager.has_command(name):
                    await self.announce(f"unknown command {name!r}, try help", "warning")
                    continue

                self.show(await self.send(msg))

        self.shutdown()
        return True

    async def _announce(self, message: str, type: str = None):
        style_map = {
            "error": "error",
            "status": "status",
            "warning": "warning",
        }
        self._print_formatted(f"[cli] {message}", style_map.get(type))

    def shutdown(self):
        core.log("cli", "shutting down")
        self.running = False
        return True
