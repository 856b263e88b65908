import pytest

from locprov.cli import build_honest_chain

# building 10,000-entry chains through the whole protocol is the expensive
# part of the suite; do it once per scheme and share
_chain_cache: dict = {}


@pytest.fixture(scope="session")
def honest_chain_factory():
    def factory(scheme: str, n: int):
        key = (scheme, n)
        if key not in _chain_cache:
            _chain_cache[key] = build_honest_chain(scheme, n)
        return _chain_cache[key]
    return factory
