import numpy as np
import pytest

from stationary_lab import catalog
from stationary_lab.catalog import CatalogEntry, UnknownCatalogIdError


PRINTED_THREE_TYPE = {
    "bomze-2": ((0, 0, 1), (0, 0, 1), (1, 0, 0)),
    "bomze-20": ((0, 0, 0), (0, 0, -1), (0, -1, 0)),
    "bomze-47": ((0, 2, 0), (2, 0, 0), (1, 1, 0)),
    "bomze-17": ((0, -1, 1), (1, 0, -1), (-1, 1, 0)),
    "bomze-7-as-printed": ((0, 1, 1), (1, 0, 1), (1, 1, 0)),
}


@pytest.mark.parametrize("entry_id,game", sorted(PRINTED_THREE_TYPE.items()))
def test_printed_matrices_pinned(entry_id, game):
    entry = catalog.get(entry_id)
    assert entry.game == game
    assert entry.provenance == "printed"


def test_rsp_equals_bomze_17():
    assert catalog.get("rsp").game == catalog.get("bomze-17").game


def test_four_type_matrix():
    m4 = catalog.get("m4")
    assert m4.game == ((0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (0, 0, 0, 1))
    assert m4.n == 4


def test_bomze_battery_shape():
    entries = [e for e in catalog.list_entries() if e.id.startswith("bomze-")
               and e.id != "bomze-7-as-printed"]
    assert len(entries) == 48
    assert len({e.id for e in entries}) == 48
    for e in entries:
        A = np.array(e.game)
        assert A.shape == (3, 3)
        assert np.all(np.diag(A) == 0)
    printed = {e.id for e in entries if e.provenance == "printed"}
    assert printed == {"bomze-2", "bomze-7", "bomze-17", "bomze-20", "bomze-47"}


def test_unknown_id_suggests_near_matches():
    with pytest.raises(UnknownCatalogIdError) as err:
        catalog.get("bomze-200")
    assert err.value.suggestions


def test_list_filters():
    three = {e.id for e in catalog.list_entries(n=3)}
    assert {"bomze-2", "bomze-20", "bomze-47", "rsp"} <= three
    fig2 = catalog.list_entries(figure="fig2")
    assert [e.id for e in fig2] == ["fig2"]
    assert {e.id for e in catalog.list_entries(figure="fig4")} == {"bomze-2", "bomze-20", "bomze-47"}
    wf = catalog.list_entries(process="wright-fisher")
    assert all(e.process == "wright-fisher" for e in wf)
    assert len(catalog.list_entries()) == len(catalog.ids())


def test_every_entry_round_trips_through_config():
    for entry in catalog.list_entries():
        clone = CatalogEntry.from_config(entry.to_config())
        assert clone == entry


def test_override_and_resolved_mu():
    e = catalog.get("rsp")
    assert e.resolved_mu() == pytest.approx(1.5 / 60)
    assert e.override(N=30).resolved_mu() == pytest.approx(1.5 / 30)
    assert e.override(mu=0.25).resolved_mu() == 0.25


def test_entry_builds_working_model():
    entry = catalog.get("closed-form-chain").override(N=4, mu=0.3)
    kern = entry.build()
    assert kern.size == 5
    sums = np.asarray(kern.matrix.sum(axis=1)).ravel()
    assert np.max(np.abs(sums - 1.0)) < 1e-12


def test_figure_tags_cover_every_figure():
    tags = set()
    for e in catalog.list_entries():
        tags.update(e.figures)
    assert {"fig1", "fig2", "fig4", "fig5", "fig6", "fig7", "fig8"} <= tags
