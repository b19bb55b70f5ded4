_acceptance_results: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results[name] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_acceptance_results):
        status = "PASS" if _acceptance_results[name] else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
