"""Shared fixtures: the worked span-shift example, the 13-token aligned
pair used across the autocomplete tests, a synthetic medical dictionary
with a hand-labeled 20-pair corpus, and a tiny training corpus for the
reference backend."""

from __future__ import annotations

import pytest

from lowreskit.med_corpus import AlignedPair, MedicalDictionary
from lowreskit.qa_augment import AnswerSpan, QAExample

GTK_DOC = "Libraries missing, install gtk2 libraries (32 and 64 bit)"
GTK_SPAN = (19, 41)  # "install gtk2 libraries"

INSULIN_DIFFICULT = (
    "Lowered glucose levels result both in the reduced release of insulin "
    "from the beta cells and in the reverse conversion of glycogen to "
    "glucose when glucose levels fall ."
)
INSULIN_SIMPLE = "This insulin tells the cells to take up glucose from the blood ."


@pytest.fixture
def gtk_example() -> QAExample:
    return QAExample(
        example_id="gtk",
        question_title="missing libraries",
        question_body="install fails with missing libraries",
        documents=(("doc1", GTK_DOC),),
        answer=AnswerSpan("doc1", *GTK_SPAN),
    )


@pytest.fixture
def insulin_pair() -> AlignedPair:
    return AlignedPair(
        article_title="Insulin",
        difficult_text=INSULIN_DIFFICULT,
        simple_text=INSULIN_SIMPLE,
    )


TRAINING_PAIRS = [
    AlignedPair("Insulin", INSULIN_DIFFICULT, INSULIN_SIMPLE),
    AlignedPair(
        "Insulin",
        "Insulin enables cells to absorb glucose from the blood .",
        "Insulin tells the cells to take in sugar from the blood .",
    ),
    AlignedPair(
        "Glycogen",
        "Glycogen is converted back to glucose when glucose levels fall .",
        "The body turns glycogen back into glucose when sugar gets low .",
    ),
    AlignedPair(
        "Aneurysm",
        "Aneurysms can commonly occur in arteries at the base of the brain .",
        "Aneurysms usually happen in arteries at the base of the brain .",
    ),
    AlignedPair(
        "Asthma",
        "Asthma is characterized by recurring episodes of airflow obstruction .",
        "Asthma causes repeated attacks where breathing becomes hard .",
    ),
]


@pytest.fixture
def training_pairs() -> list[AlignedPair]:
    return list(TRAINING_PAIRS)


MEDICAL_TERMS = {
    "insulin": "Clinical Drug",
    "glucose": "Clinical Drug",
    "glycogen": "Clinical Drug",
    "beta cells": "Disease or Syndrome",
    "diabetes": "Disease or Syndrome",
    "aneurysm": "Disease or Syndrome",
    "artery": "Disease or Syndrome",
    "aorta": "Disease or Syndrome",
    "leptospirosis": "Disease or Syndrome",
    "miscarriage": "Disease or Syndrome",
    "embryo": "Disease or Syndrome",
    "fetus": "Disease or Syndrome",
    "osteoarthritis": "Disease or Syndrome",
    "cartilage": "Disease or Syndrome",
    "arthritis": "Disease or Syndrome",
    "asthma": "Disease or Syndrome",
    "bronchitis": "Disease or Syndrome",
    "vaccination": "Therapeutic or Preventive Procedure",
    "chemotherapy": "Therapeutic or Preventive Procedure",
    "biopsy": "Diagnostic Procedure",
}


@pytest.fixture
def medical_dictionary() -> MedicalDictionary:
    return MedicalDictionary(MEDICAL_TERMS)


def _pair(title: str, difficult: str, simple: str = "simple version .") -> AlignedPair:
    return AlignedPair(article_title=title, difficult_text=difficult, simple_text=simple)


# Seven pairs built to pass the medical filter (title match + >= 4 distinct
# sentence terms) and thirteen built to miss it: no terms at all, too few
# sentence terms, or a medical sentence under a non-medical title.
MEDICAL_FIXTURE_PAIRS = [
    _pair("Diabetes", "In diabetes the insulin signal fails so glucose builds up and glycogen stores shrink ."),
    _pair("Insulin", "Insulin from the beta cells moves glucose out of blood and into glycogen ."),
    _pair("Aneurysm", "An aneurysm may widen an artery near the aorta and need chemotherapy after a biopsy ."),
    _pair("Osteoarthritis", "Osteoarthritis wears down cartilage and the arthritis causes pain after a biopsy ."),
    _pair("Asthma", "Asthma and bronchitis both inflame airways ; vaccination and chemotherapy do not help arthritis ."),
    _pair("Miscarriage", "A miscarriage means the embryo or fetus is lost before the aorta of the fetus forms ."),
    _pair("Leptospirosis", "Leptospirosis is diagnosed with a biopsy and treated before arthritis or bronchitis develops ."),
]

NON_MEDICAL_FIXTURE_PAIRS = [
    _pair("Football", "The striker scored twice and the crowd sang all night ."),
    _pair("Jazz", "The quartet recorded a live album in a small basement club ."),
    _pair("Railways", "The new line cut travel time between the two cities in half ."),
    _pair("Chess", "The champion sacrificed a rook to force a quick checkmate ."),
    _pair("Volcanoes", "Lava flows reshaped the valley over a few thousand years ."),
    _pair("Painting", "The mural took three artists an entire summer to finish ."),
    # Medical title but too few distinct sentence terms (< 4).
    _pair("Diabetes", "Diabetes changes how the body handles sugar over time ."),
    _pair("Asthma", "Asthma makes breathing difficult during exercise ."),
    _pair("Insulin", "Insulin and glucose are kept in careful balance by the body ."),
    # Enough sentence terms but a non-medical title, so the title gate fails.
    _pair("History", "Treatments such as insulin for diabetes and vaccination against bronchitis changed arthritis care ."),
    _pair("Economics", "Spending on chemotherapy , vaccination , biopsy equipment and insulin rose sharply ."),
    # A couple of near-miss spellings that stay under the 0.85 similarity bar.
    _pair("Gardening", "Compost insulates roots while glucose-free fertilizer feeds the soil ."),
    _pair("Cooking", "Caramel needs sugar syrup heated well past the soft-ball stage ."),
]


@pytest.fixture
def corpus_fixture() -> tuple[list[AlignedPair], list[AlignedPair]]:
    return list(MEDICAL_FIXTURE_PAIRS), list(NON_MEDICAL_FIXTURE_PAIRS)
