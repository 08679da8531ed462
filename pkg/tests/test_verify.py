import pytest

from disperse1d.verify import verify_suite


@pytest.mark.slow
def test_verify_suite_sech2(sech2):
    V, field, sd = sech2
    report = verify_suite(V, scattering=(field, sd))
    failed = {k: v for k, v in report["checks"].items() if not v["pass"]}
    assert not failed
    assert report["pass"]
    assert {"kernel_time_reversal", "free_exactness_fresnel", "oracle_group_law", "fresnel_limit"} <= set(report["checks"])
