import os

_logging_enabled = True

def set_logging(enabled: bool):
    """turn console logging on or off (tests and benchmark runs switch it off)"""
    global _logging_enabled
    _logging_enabled = bool(enabled)

def log(category: str, msg: str):
    """simple console log"""
    if not _logging_enabled:
        return
    print(f"[{category.upper()}] {msg}", flush=True)

def log_error(msg: str, e: Exception):
    """console log but with extra spice for errors"""
    tb = e.__traceback__
    if tb is None:
        log("error", f"{msg}: {e}")
        return

    # walk to the frame that actually raised
    while tb.tb_next is not None:
        tb = tb.tb_next
    log("error", f"{msg}: {e} | {tb.tb_frame.f_code.co_filename}, {tb.tb_frame.f_code.co_name}, ln:{tb.tb_lineno}")

def get_path(path: str = ""):
    """get path relative to the project root directory. returns root path if no path is specified."""
    return os.path.abspath(os.path.join(
        os.path.dirname(__file__),
        os.pardir,
        path
    ))

def get_data_path():
    return get_path("data")

def resolve_path(path: str):
    """absolute paths pass through, relative ones are taken from the current working directory"""
    return os.path.abspath(os.path.expanduser(path))
