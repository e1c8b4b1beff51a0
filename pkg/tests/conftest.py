from __future__ import annotations

import pytest

from scholarmob.corpus import AuthorMention, PublicationRecord, StudyWindow, default_registry


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture
def window():
    return StudyWindow(2008, 2017)


def make_mention(last="Haddad", first="Ahmed", countries=("EGY",), email=None, orcid=None):
    return AuthorMention(
        last_name=last,
        first_name=first,
        countries=frozenset(countries),
        email=email,
        orcid=orcid,
    )


def make_record(pub_id, year, mentions, doi=None, external_ids=()):
    return PublicationRecord(
        pub_id=pub_id,
        year=year,
        mentions=tuple(mentions),
        doi=doi,
        external_ids=tuple(external_ids),
    )
