import os
import random
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

os.environ.setdefault("LOG_LEVEL", "WARNING")

import pytest  # noqa: E402

from app.services.almost_set import A_SET  # noqa: E402
from app.services.certificates import (CertificateError, certificate_json, compute_digest, issue,  # noqa: E402
                                       load_certificate, reseal, save_certificate, verify_certificate)
from app.services.descriptors import UpMinus  # noqa: E402
from app.services.semilattice import Point, ZERO  # noqa: E402
from app.services.set_algebra import Cyl  # noqa: E402
from app.services.topology import get_topology  # noqa: E402
from app.services.witnesses import TheoremWitnesses  # noqa: E402
from app.utils.generators import collapse_sequence, mutate_certificate, swap_to_complement  # noqa: E402

TAU_C = get_topology("tau_c", 2)
TAU_FC2 = get_topology("tau_fc2", 2)


def corpus():
    witnesses = TheoremWitnesses(TAU_C)
    return [
        witnesses.neighborhood_in_upset(Point.of(3)).certificate,
        witnesses.separation_pair(Point.of(1), Point.of(2)).certificate,
        witnesses.separate_continuity_modulus(Point.of(1), Point.of(2), UpMinus(ZERO)).certificate,
        witnesses.accumulation_point(Cyl(Point.of(1), A_SET)).certificate,
    ]


def test_fresh_certificates_verify():
    for cert in corpus():
        result = verify_certificate(cert)
        assert result.ok, result.reason
        assert result.failed_index is None


def test_digest_mismatch_is_reported():
    cert = corpus()[0]
    edited = cert.model_copy(update={"payload": {**cert.payload, "point": "{4}"}})
    result = verify_certificate(edited)
    assert not result.ok
    assert result.reason == "digest mismatch"
    assert result.checked == 0
    assert result.layer == "digest"


def test_script_that_does_not_follow_from_the_payload():
    cert = corpus()[0]
    script = list(cert.script)
    script[1] = script[1].model_copy(update={"expect": False})
    result = verify_certificate(reseal(cert.model_copy(update={"script": script})))
    assert not result.ok
    assert result.failed_index == 1
    assert "does not follow" in result.reason
    assert result.layer == "script"


def test_unknown_kind_is_rejected():
    cert = reseal(corpus()[0].model_copy(update={"kind": "Nonsense"}))
    result = verify_certificate(cert)
    assert not result.ok
    assert "unknown kind" in result.reason
    assert result.layer == "kind"
    with pytest.raises(CertificateError):
        issue("Nonsense", TAU_C, {})


@pytest.mark.parametrize("seed", range(20))
def test_resealed_mutations_are_rejected(seed):
    rng = random.Random(seed)
    for cert in corpus():
        mutated = mutate_certificate(cert, rng)
        assert mutated.digest == compute_digest(mutated)
        assert verify_certificate(mutated).layer in ("payload", "script")


def test_collapsed_sequence_fails_its_meet_assertion():
    cert = TheoremWitnesses(TAU_FC2).joint_discontinuity_certificate(depth=4).certificate
    tampered = collapse_sequence(cert)
    result = verify_certificate(tampered)
    assert not result.ok
    assert result.failed_index == 2
    assert "meet" in result.reason
    assert result.layer == "evaluation"


def test_complement_swap_fails_membership():
    cert = TheoremWitnesses(TAU_FC2).closed_discrete_witness().certificate
    tampered = swap_to_complement(cert)
    assert tampered.payload["expr"] != cert.payload["expr"]
    result = verify_certificate(tampered)
    assert not result.ok
    assert result.failed_index == 0


def test_save_and_load(tmp_path):
    cert = corpus()[2]
    path = save_certificate(cert, str(tmp_path / "nested" / "cert.json"))
    loaded = load_certificate(path)
    assert loaded == cert
    assert verify_certificate(loaded).ok
    with open(path, "r", encoding="utf-8") as f:
        assert f.read() == certificate_json(cert) + "\n"


def test_serialization_is_byte_stable():
    first = [certificate_json(cert) for cert in corpus()]
    second = [certificate_json(cert) for cert in corpus()]
    assert first == second


def test_unreadable_certificate(tmp_path):
    with pytest.raises(CertificateError):
        load_certificate(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(CertificateError):
        load_certificate(str(broken))


def test_context_records_the_tau_fcn_anchor():
    topology = get_topology("tau_fcn", 3)
    cert = TheoremWitnesses(topology).closed_discrete_witness().certificate
    assert cert.context.anchor == str(topology.id.anchor)
    assert verify_certificate(cert).ok


if __name__ == "__main__":
    # Run ad-hoc if executed directly
    test_fresh_certificates_verify()
    test_digest_mismatch_is_reported()
    test_collapsed_sequence_fails_its_meet_assertion()
    print("All ad-hoc tests completed")
