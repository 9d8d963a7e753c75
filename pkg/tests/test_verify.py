from mottlab.verify import run_invariant_suite


def test_invariant_suite_passes():
    checks = run_invariant_suite()
    failures = [c for c in checks if not c.passed]
    assert not failures, "\n".join(f"{c.name}: {c.detail}" for c in failures)
    # every invariant family of the kernel and phase layers is represented
    names = " ".join(c.name for c in checks)
    for keyword in ("norm", "completeness", "gradient", "determinant", "signature",
                    "finite differences", "bound"):
        assert keyword in names
