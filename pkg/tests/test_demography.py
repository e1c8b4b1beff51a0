import random
from collections import Counter

import pytest
import requests
from hypothesis import given, strategies as st

from scholarmob.corpus import index_records
from scholarmob.demography import (
    FEMALE,
    MALE,
    UNKNOWN,
    LocalTableProvider,
    ProviderError,
    RemoteGenderProvider,
    academic_age,
    academic_origin,
    age_bucket,
    attribute_demographics,
    gender_origin,
    infer_gender,
    representative_first_name,
)
from scholarmob.disambig import AuthorCluster
from scholarmob.names import NameKey

from conftest import make_mention, make_record

KEY = NameKey("haddad", "a")


def cluster_from(pubs, last="Haddad", first="Amal", email=None):
    """One researcher: (pub_id, year, countries) triples become records."""
    records = [
        make_record(pub_id, year, [make_mention(last, first, countries, email=email)])
        for pub_id, year, countries in pubs
    ]
    cluster = AuthorCluster(
        "haddad.a.0000", KEY, frozenset((r.pub_id, 0) for r in records)
    )
    return cluster, index_records(records)


# --------------------------------------------------------------------------
# Academic origin


def test_origin_earliest_year():
    cluster, by_id = cluster_from([("p1", 2009, ("EGY",)), ("p2", 2012, ("SAU",))])
    assert academic_origin(cluster, by_id) == {"EGY"}


def test_origin_returns_whole_set():
    cluster, by_id = cluster_from([("p1", 2010, ("MAR", "FRA"))])
    assert academic_origin(cluster, by_id) == {"MAR", "FRA"}


def test_origin_year_tie_broken_by_pub_id():
    cluster, by_id = cluster_from([("p2", 2010, ("SAU",)), ("p1", 2010, ("EGY",))])
    assert academic_origin(cluster, by_id) == {"EGY"}


def test_origin_against_min_scan_oracle():
    rng = random.Random(17)
    pool = ["EGY", "SAU", "TUN", "FRA", "USA"]
    for i in range(500):
        pubs = [
            (f"p{i}_{j}", rng.randint(2000, 2017), (rng.choice(pool),))
            for j in range(rng.randint(1, 6))
        ]
        cluster, by_id = cluster_from(pubs)
        expected = min(pubs, key=lambda p: (p[1], p[0]))
        assert academic_origin(cluster, by_id) == set(expected[2])


def test_origin_empty_cluster_errors():
    cluster = AuthorCluster("x", KEY, frozenset())
    with pytest.raises(ValueError):
        academic_origin(cluster, {})


# --------------------------------------------------------------------------
# Gender origin


def test_gender_origin_first_equals_modal():
    cluster, by_id = cluster_from(
        [("p1", 2008, ("IRN",)), ("p2", 2010, ("IRN",)), ("p3", 2012, ("MYS",))]
    )
    assert gender_origin(cluster, by_id) == {"IRN"}


def test_gender_origin_first_differs_from_modal():
    cluster, by_id = cluster_from(
        [("p1", 2008, ("IRN",)), ("p2", 2010, ("MYS",)), ("p3", 2012, ("MYS",))]
    )
    assert gender_origin(cluster, by_id) == {"IRN", "MYS"}


def test_gender_origin_modal_tie_falls_back_to_all():
    cluster, by_id = cluster_from([("p1", 2008, ("IRN",)), ("p2", 2010, ("MYS",))])
    assert gender_origin(cluster, by_id) == {"IRN", "MYS"}


def test_gender_origin_against_frequency_oracle():
    rng = random.Random(23)
    pool = ["EGY", "SAU", "TUN", "FRA"]
    for i in range(300):
        pubs = [
            (f"p{i}_{j:02d}", rng.randint(2008, 2017), (rng.choice(pool),))
            for j in range(rng.randint(1, 8))
        ]
        cluster, by_id = cluster_from(pubs)
        got = gender_origin(cluster, by_id)
        counts = Counter(c for _, _, cs in pubs for c in cs)
        top = counts.most_common()
        modal = [c for c, n in top if n == top[0][1]]
        first = min(pubs, key=lambda p: (p[1], p[0]))
        if len(modal) == 1 and modal[0] in first[2]:
            assert got == set(modal)
        else:
            assert got == set(counts)


def test_gender_origin_singleton_only_if_first_pub_country():
    rng = random.Random(5)
    pool = ["EGY", "SAU", "TUN"]
    for i in range(200):
        pubs = [
            (f"p{i}_{j}", rng.randint(2008, 2017), (rng.choice(pool),))
            for j in range(rng.randint(1, 5))
        ]
        cluster, by_id = cluster_from(pubs)
        got = gender_origin(cluster, by_id)
        if len(got) == 1:
            first = min(pubs, key=lambda p: (p[1], p[0]))
            assert got <= set(first[2])


# --------------------------------------------------------------------------
# Academic age and buckets


def test_age_zero_at_first_publication_year():
    cluster, by_id = cluster_from([("p1", 2017, ("EGY",))])
    assert academic_age(cluster, by_id, 2017) == 0


def test_age_simple_arithmetic():
    cluster, by_id = cluster_from([("p1", 2005, ("EGY",))])
    assert academic_age(cluster, by_id, 2017) == 12
    assert age_bucket(12) == "11-15"


def test_age_reference_before_first_publication_errors():
    cluster, by_id = cluster_from([("p1", 2010, ("EGY",))])
    with pytest.raises(ValueError):
        academic_age(cluster, by_id, 2009)


@pytest.mark.parametrize(
    "age,label",
    [(0, "0-5"), (5, "0-5"), (6, "6-10"), (10, "6-10"), (11, "11-15"), (15, "11-15"),
     (16, "16-20"), (20, "16-20"), (21, "21+"), (40, "21+")],
)
def test_bucket_edges(age, label):
    assert age_bucket(age) == label


def test_bucket_rejects_negative():
    with pytest.raises(ValueError):
        age_bucket(-1)


@given(first=st.integers(min_value=1980, max_value=2017),
       delta=st.integers(min_value=0, max_value=40),
       shift=st.integers(min_value=-30, max_value=30))
def test_age_translation_invariance(first, delta, shift):
    cluster, by_id = cluster_from([("p1", first, ("EGY",))])
    shifted, by_id2 = cluster_from([("p1", first + shift, ("EGY",))])
    assert academic_age(cluster, by_id, first + delta) == academic_age(
        shifted, by_id2, first + shift + delta
    )


# --------------------------------------------------------------------------
# Gender inference


class StubProvider:
    def __init__(self, table, name="stub", fail=False):
        self.table = table
        self.name = name
        self.fail = fail
        self.calls = 0

    def lookup(self, first_name, country):
        self.calls += 1
        if self.fail:
            raise ProviderError("stub unavailable")
        return self.table.get((first_name.lower(), country))


def test_local_table_fatima_any_country():
    provider = LocalTableProvider()
    assert infer_gender("Fatima", {"EGY"}, [provider]) == FEMALE
    assert infer_gender("Fatima", {"FRA"}, [provider]) == FEMALE


def test_confidence_boundary_is_inclusive_floor():
    provider = StubProvider({("amal", "EGY"): (FEMALE, 0.89)})
    assert infer_gender("Amal", {"EGY"}, [provider], min_confidence=0.90) == UNKNOWN
    assert infer_gender("Amal", {"EGY"}, [provider], min_confidence=0.89) == FEMALE


def test_exact_threshold_passes():
    provider = StubProvider({("amal", "EGY"): (FEMALE, 0.90)})
    assert infer_gender("Amal", {"EGY"}, [provider], min_confidence=0.90) == FEMALE


def test_name_absent_everywhere_is_unknown():
    assert infer_gender("Xq", {"EGY"}, [LocalTableProvider()]) == UNKNOWN


def test_conflicting_accepted_results_across_countries():
    provider = LocalTableProvider()
    # country-specific rows disagree for this name
    assert infer_gender("Andrea", {"ITA", "DEU"}, [provider]) == UNKNOWN
    assert infer_gender("Andrea", {"ITA"}, [provider]) == MALE
    assert infer_gender("Andrea", {"DEU"}, [provider]) == FEMALE


def test_failing_provider_skipped_with_fallback():
    failing = StubProvider({}, name="down", fail=True)
    assert infer_gender("Fatima", {"EGY"}, [failing, LocalTableProvider()]) == FEMALE


def test_all_providers_failing_gives_unknown():
    failing = StubProvider({}, name="down", fail=True)
    assert infer_gender("Fatima", {"EGY"}, [failing]) == UNKNOWN


def test_low_confidence_first_provider_falls_through():
    weak = StubProvider({("fatima", "EGY"): (MALE, 0.55)})
    assert infer_gender("Fatima", {"EGY"}, [weak, LocalTableProvider()]) == FEMALE


def test_inference_deterministic():
    provider = LocalTableProvider()
    results = {infer_gender("Omar", {"EGY", "SAU"}, [provider]) for _ in range(5)}
    assert results == {MALE}


class FakeResponse:
    def __init__(self, payload, status=200):
        self.payload = payload
        self.status = status

    def raise_for_status(self):
        if self.status != 200:
            raise requests.HTTPError(f"status {self.status}")

    def json(self):
        return self.payload


class FakeSession:
    def __init__(self, payload=None, status=200, error=None):
        self.payload = payload
        self.status = status
        self.error = error
        self.requests = []

    def get(self, url, params=None, timeout=None):
        self.requests.append((url, params, timeout))
        if self.error is not None:
            raise self.error
        return FakeResponse(self.payload, self.status)


def test_remote_provider_maps_payload():
    session = FakeSession({"gender": "female", "probability": 0.97})
    provider = RemoteGenderProvider("svc", "https://svc.test/v1", session=session)
    assert provider.lookup("Fatima", "EGY") == (FEMALE, 0.97)
    url, params, timeout = session.requests[0]
    assert params["name"] == "Fatima"
    assert params["country_id"] == "EGY"
    assert timeout == 5.0


def test_remote_provider_null_gender_is_no_answer():
    session = FakeSession({"gender": None, "probability": 0.0})
    provider = RemoteGenderProvider("svc", "https://svc.test/v1", session=session)
    assert provider.lookup("Xq", "EGY") is None


def test_remote_provider_transport_error_raises_provider_error():
    session = FakeSession(error=requests.ConnectionError("boom"))
    provider = RemoteGenderProvider("svc", "https://svc.test/v1", session=session)
    with pytest.raises(ProviderError):
        provider.lookup("Fatima", "EGY")


def test_remote_provider_http_error_raises_provider_error():
    session = FakeSession({"gender": "female"}, status=500)
    provider = RemoteGenderProvider("svc", "https://svc.test/v1", session=session)
    with pytest.raises(ProviderError):
        provider.lookup("Fatima", "EGY")


# --------------------------------------------------------------------------
# Representative name and full attribution


def test_representative_name_prefers_most_common_full_form():
    records = [
        make_record("p1", 2010, [make_mention("Haddad", "A.")]),
        make_record("p2", 2011, [make_mention("Haddad", "Amal")]),
        make_record("p3", 2012, [make_mention("Haddad", "Amal")]),
    ]
    cluster = AuthorCluster("c", KEY, frozenset((r.pub_id, 0) for r in records))
    assert representative_first_name(cluster, index_records(records)) == "amal"


def test_representative_name_none_when_initials_only():
    records = [make_record("p1", 2010, [make_mention("Haddad", "A.")])]
    cluster = AuthorCluster("c", KEY, frozenset({("p1", 0)}))
    assert representative_first_name(cluster, index_records(records)) is None


def test_attribute_demographics_event_vs_window_end(window):
    records = [
        make_record("p1", 2009, [make_mention("Haddad", "Fatima", ("EGY",))]),
        make_record("p2", 2013, [make_mention("Haddad", "Fatima", ("FRA",))]),
    ]
    cluster = AuthorCluster("c", NameKey("haddad", "f"), frozenset({("p1", 0), ("p2", 0)}))
    by_id = index_records(records)
    providers = [LocalTableProvider()]

    event = attribute_demographics(
        [cluster], by_id, window, providers, age_reference="event",
        event_years={"c": 2013},
    )[0]
    assert event.academic_age == 4
    assert event.reference_year == 2013
    assert event.gender == FEMALE
    assert event.academic_origin == {"EGY"}
    assert event.linked_countries == {"EGY", "FRA"}

    window_end = attribute_demographics(
        [cluster], by_id, window, providers, age_reference="window-end",
        event_years={"c": 2013},
    )[0]
    assert window_end.academic_age == 8
    assert window_end.reference_year == 2017


def test_attribute_demographics_rejects_bad_mode(window):
    with pytest.raises(ValueError):
        attribute_demographics([], {}, window, [LocalTableProvider()], age_reference="nope")


def test_remote_provider_caches_lookups():
    session = FakeSession({"gender": "female", "probability": 0.97})
    provider = RemoteGenderProvider("svc", "https://svc.test/v1",
                                    min_interval=0.0, session=session)
    assert provider.lookup("Fatima", "EGY") == (FEMALE, 0.97)
    assert provider.lookup("Fatima", "EGY") == (FEMALE, 0.97)
    assert provider.lookup("fatima", "EGY") == (FEMALE, 0.97)  # normalized key
    assert len(session.requests) == 1
    provider.lookup("Fatima", "FRA")
    assert len(session.requests) == 2


def test_remote_provider_caches_no_answer():
    session = FakeSession({"gender": None})
    provider = RemoteGenderProvider("svc", "https://svc.test/v1",
                                    min_interval=0.0, session=session)
    assert provider.lookup("Xq", "EGY") is None
    assert provider.lookup("Xq", "EGY") is None
    assert len(session.requests) == 1


def test_remote_provider_rate_limits_requests():
    import time as time_module

    session = FakeSession({"gender": "male", "probability": 0.95})
    provider = RemoteGenderProvider("svc", "https://svc.test/v1",
                                    min_interval=0.05, session=session)
    start = time_module.monotonic()
    provider.lookup("Omar", "EGY")
    provider.lookup("Omar", "SAU")
    elapsed = time_module.monotonic() - start
    assert elapsed >= 0.05
