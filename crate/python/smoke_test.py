"""Smoke test for the kbp extension module.

Build and import, e.g.:

    cargo build -p kbp-python --release --features extension-module
    cp target/release/libkbp.so python/kbp.so
    python3 python/smoke_test.py
"""

import json
import math

import kbp


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    assert close(kbp.log_gamma(0.5), 0.5 * math.log(math.pi), 1e-14)
    assert close(kbp.beta(0.5, 0.5), math.pi, 1e-14)
    assert close(kbp.reg_inc_beta(0.3, 1.0, 2.0), 1.0 - 0.7**2, 1e-14)

    table = json.loads(kbp.constants(4, 2))
    assert close(table["c"]["2"], 2.0 / math.pi, 1e-15)
    assert close(table["d_dual"]["2"], math.pi / 2.0, 1e-15)

    one = kbp.Profile.constant(1.0)
    for t in (0.0, 0.4, 1.0):
        assert close(kbp.dual(6, 3, one, t), 1.0, 1e-12)
        assert close(kbp.perp_dual(6, 3, one, t), 1.0, 1e-12)
        assert close(kbp.forward(6, 3, one, t), 1.0, 1e-12)

    s2 = kbp.Profile.monomial([0.0, 0.0, 1.0])
    assert close(kbp.forward(4, 2, s2, 0.8), 0.5 * 0.64, 1e-12)
    lhs, rhs, rel = kbp.duality_check(7, 3, s2, kbp.Profile.monomial([1.0, -2.0, 0.5]))
    assert rel < 1e-8, (lhs, rhs)

    d1, d2, d = kbp.window_deltas(0.5, 0.0625)
    assert d2 == 0.4 and abs(d1 - 0.157925) < 1e-6 and d == d2
    assert close(kbp.gamma_sup(4, d), 0.8, 1e-9)

    g = kbp.Profile.parabola_bump(0.5, 0.0625, 9.0)
    assert g(0.5) == -1.0 and close(g(1.0), 159.0, 1e-12)
    assert [round(c, 9) for c in g.to_monomial()] == [159.0, -640.0, 640.0]
    assert kbp.Profile.from_json(g.to_json()).to_json() == g.to_json()

    built = json.loads(kbp.construct(4, 2, grid=512))
    assert built["value_at_s0"] == -1.0 and built["verification"]["dual_passes"]

    cert = json.loads(kbp.certify(4, 2))
    assert cert["pairing_value"] < -1e-6 and cert["N"] == 400
    try:
        kbp.certify(4, 2, g=one)
    except kbp.CertificateNotFound as e:
        assert "certificate not found" in str(e)
    else:
        raise AssertionError("constant profile must not certify")

    rows = kbp.body_profile(4, 2, grid=33)
    assert min(r for _, r in rows) >= 1.0 and close(rows[-1][1] ** 2, 159.0, 1e-9)

    try:
        kbp.construct(4, 2, eps=0.3)
    except ValueError:
        pass
    else:
        raise AssertionError("window outside (0, 1) must be rejected")

    report = json.loads(kbp.selftest(7))
    assert report["failed"] == 0, [c for c in report["checks"] if not c["passed"]]
    print(f"smoke test ok: pairing {cert['pairing_value']:.6e}, selftest {report['passed']} checks")


if __name__ == "__main__":
    main()
