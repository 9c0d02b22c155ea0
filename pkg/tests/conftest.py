def pytest_configure(config):
    config.addinivalue_line("markers", "slow: varreduras de aceitação demoradas (pytest -m 'not slow' pula)")
