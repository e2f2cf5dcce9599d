from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")



def pytest_terminal_summary(terminalreporter):
    lines = sorted(value
                   for reports in terminalreporter.stats.values()
                   for rep in reports if getattr(rep, "when", None) == "call"
                   for key, value in rep.user_properties if key == "criterion")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
