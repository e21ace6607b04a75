import core
import shlex

class Channel:
    """Base class for front ends"""

    def __init__(self, manager):
        self.name = core.module.get_name(self)
        self.manager = manager

    def _parse(self, line: str):
        parts = shlex.split(line)
        if not parts:
            return None, []
        return parts[0].lower(), parts[1:]

    async def send(self, line: str):
        """run one command line through the manager and return its result dict"""
        cmd, args = self._parse(line)
        if cmd is None:
            return None
        try:
            return await self.manager.run_command(cmd, args)
        except core.errors.ChaosDiffError as e:
            core.log_error(f"{cmd} failed", e)
            return {"status": "error", "content": str(e)}
        except Exception as e:
            # solver and linear algebra failures from inside a trial
            core.log_error(f"{cmd} crashed", e)
            return {"status": "error", "content": f"{type(e).__name__}: {e}"}

    async def announce(self, message: str, type: str = None):
        """show a message to the user, styled by type (error, status, warning)"""
        await self._announce(message, type)

    async def _announce(self, message: str, type: str = None):
        core.log(self.name, message)

    async def run(self):
        raise NotImplementedError
