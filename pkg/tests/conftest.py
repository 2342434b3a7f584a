"""Pytest configuration and fixtures for frozenflake tests."""

import logging

import pytest


@pytest.fixture(autouse=True)
def restore_warning_capture():
    """Undo ``logging.captureWarnings`` after each test.

    The command line routes warnings into logging; later tests that expect
    warnings through ``pytest.warns`` must see the default handler.
    """
    yield
    logging.captureWarnings(False)
