import os

from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k])
