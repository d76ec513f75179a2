"""Condition and outcome catalogs for the synthetic rule generator.

Each condition is a second-person clause with scenario paraphrases for both
polarities. The paraphrases cover four phenomena: numeric thresholds
restated, date comparisons, hypernym substitution, and sentence paraphrase.
Follow-up questions are produced by the same template rephraser the service
uses, so generated dialogs and live sessions share exact question strings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .spanqg import rephrase

PHENOMENA = ("numeric", "date", "hypernym", "paraphrase")


@dataclass(frozen=True)
class ConditionTemplate:
    key: str
    clause: str
    phenomenon: str
    entail: tuple[str, ...]
    contradict: tuple[str, ...]
    question: str = field(default="")

    def __post_init__(self):
        if not self.question:
            object.__setattr__(self, "question", rephrase(self.clause))


@dataclass(frozen=True)
class OutcomeTemplate:
    key: str
    outcome: str  # verb phrase: "apply for the startup loan"
    question_forms: tuple[str, ...] = ()  # user-question phrasings

    def __post_init__(self):
        if not self.question_forms:
            object.__setattr__(self, "question_forms", (
                f"Can I {self.outcome}?",
                f"Am I able to {self.outcome}?",
                f"Do I qualify to {self.outcome}?",
            ))


CONDITIONS: tuple[ConditionTemplate, ...] = (
    # numeric thresholds
    ConditionTemplate(
        "earn-under-2000", "you earn less than 2000 dollars a month", "numeric",
        ("I earn 1500 dollars a month.", "My monthly pay is 1200 dollars."),
        ("I earn 2500 dollars a month.", "My monthly pay is 3200 dollars.")),
    ConditionTemplate(
        "work-16-hours", "you work at least 16 hours a week", "numeric",
        ("I work 20 hours a week.", "I work 35 hours every week."),
        ("I work 10 hours a week.", "I only work 5 hours a week.")),
    ConditionTemplate(
        "saved-over-500", "you have saved more than 500 dollars", "numeric",
        ("I have saved 800 dollars.", "My savings are around 900 dollars."),
        ("I have saved 200 dollars.", "My savings are only 100 dollars.")),
    ConditionTemplate(
        "over-18", "you are over 18 years old", "numeric",
        ("I am 25 years old.", "I turned 30 last month."),
        ("I am 16 years old.", "I just turned 17.")),
    ConditionTemplate(
        "under-65", "you are under 65 years old", "numeric",
        ("I am 40 years old.", "I am 52 years old."),
        ("I am 70 years old.", "I am 81 years old.")),
    ConditionTemplate(
        "employ-under-50", "you employ fewer than 50 people", "numeric",
        ("My firm employs 12 people.", "We have a staff of 30 people."),
        ("My firm employs 80 people.", "We have a staff of 200 people.")),
    ConditionTemplate(
        "drive-under-10000", "you drive less than 10000 miles a year", "numeric",
        ("I drive about 4000 miles a year.", "I drive 6000 miles a year."),
        ("I drive 20000 miles a year.", "I drive about 15000 miles a year.")),
    ConditionTemplate(
        "lived-5-years", "you have lived here for at least 5 years", "numeric",
        ("I have lived here for 9 years.", "I have lived here for 12 years."),
        ("I moved here 2 years ago.", "I have lived here for 1 year.")),
    # date comparisons
    ConditionTemplate(
        "born-before-1953", "you were born before 6 april 1953", "date",
        ("I was born in 1950.", "I was born in 1948."),
        ("I was born in 1960.", "I was born in 1972.")),
    ConditionTemplate(
        "applied-before-2020", "you applied before january 2020", "date",
        ("I applied in 2018.", "I sent my application in 2016."),
        ("I applied in 2023.", "I sent my application in 2021.")),
    ConditionTemplate(
        "moved-after-2010", "you moved in after 2010", "date",
        ("I moved in during 2015.", "I moved in during 2019."),
        ("I moved in during 2005.", "I moved in during 2001.")),
    ConditionTemplate(
        "married-before-2005", "you were married before 2005", "date",
        ("We married in 2001.", "Our wedding was in 1998."),
        ("We married in 2012.", "Our wedding was in 2016.")),
    ConditionTemplate(
        "started-after-2019", "you started the job after march 2019", "date",
        ("I started the job in 2021.", "I started the job in 2022."),
        ("I started the job in 2017.", "I started the job in 2015.")),
    ConditionTemplate(
        "registered-before-2021", "you registered before may 2021", "date",
        ("I registered in 2019.", "I registered back in 2018."),
        ("I registered in 2022.", "I registered in 2023.")),
    # hypernym substitution
    ConditionTemplate(
        "own-vehicle", "you own a vehicle", "hypernym",
        ("I own a car.", "I own a motorcycle.", "I own a van."),
        ("I do not own any vehicle.", "I have never owned a vehicle.")),
    ConditionTemplate(
        "keep-pet", "you keep a pet", "hypernym",
        ("I keep a dog.", "I keep a cat.", "I keep a parrot."),
        ("I do not keep any pet.", "There are no animals in my home.")),
    ConditionTemplate(
        "have-disability", "you have a disability", "hypernym",
        ("I am blind.", "I use a wheelchair.", "I am deaf."),
        ("I have no disability.", "I am fully able bodied.")),
    ConditionTemplate(
        "healthcare-worker", "you are a healthcare worker", "hypernym",
        ("I work as a nurse.", "I am a doctor.", "I am a paramedic."),
        ("I do not work in healthcare.", "My job is in construction.")),
    ConditionTemplate(
        "grow-crops", "you grow crops", "hypernym",
        ("I grow wheat.", "I grow barley.", "I grow potatoes."),
        ("I do not grow anything.", "My land lies unused.")),
    ConditionTemplate(
        "play-instrument", "you play a musical instrument", "hypernym",
        ("I play the violin.", "I play the piano."),
        ("I do not play any instrument.", "I have never played music.")),
    ConditionTemplate(
        "receive-benefit", "you receive a state benefit", "hypernym",
        ("I receive housing support.", "I get the jobseeker allowance."),
        ("I receive no benefits.", "I get no support from the state.")),
    # sentence paraphrase
    ConditionTemplate(
        "for-profit", "you are a for-profit business", "paraphrase",
        ("My business is run for profit.", "We operate to make a profit."),
        ("We are a charity and make no profit.", "Our organisation is non profit.")),
    ConditionTemplate(
        "live-uk", "you live in the united kingdom", "paraphrase",
        ("My home is in the UK.", "I live in Britain."),
        ("I live outside the UK.", "My home is in Spain.")),
    ConditionTemplate(
        "self-employed", "you are self employed", "paraphrase",
        ("I work for myself.", "I run my own business alone."),
        ("I work for a large company.", "I am employed by someone else.")),
    ConditionTemplate(
        "valid-passport", "you have a valid passport", "paraphrase",
        ("My passport is current.", "My passport is up to date."),
        ("My passport expired.", "I have no passport at all.")),
    ConditionTemplate(
        "served-forces", "you served in the armed forces", "paraphrase",
        ("I was a soldier for six years.", "I spent years in the navy."),
        ("I never joined the military.", "I have no military service.")),
    ConditionTemplate(
        "full-time-student", "you are a full time student", "paraphrase",
        ("I study full time at college.", "I attend university full time."),
        ("I left school and work now.", "I only study one evening a week.")),
    ConditionTemplate(
        "rent-home", "you rent your home", "paraphrase",
        ("I pay rent to a landlord.", "My flat is rented."),
        ("I own my house outright.", "I live in a house I bought.")),
    ConditionTemplate(
        "children-under-16", "you have children under 16", "paraphrase",
        ("My daughter is 10 years old.", "My son is 7 years old."),
        ("My children are all grown adults.", "I have no children at home.")),
    ConditionTemplate(
        "driving-licence", "you hold a driving licence", "paraphrase",
        ("I passed my driving test years ago.", "I have a full licence."),
        ("I never learned to drive.", "My licence was revoked.")),
    ConditionTemplate(
        "unemployed", "you are currently unemployed", "paraphrase",
        ("I lost my job last month and have not found work.", "I am out of work."),
        ("I am working at the moment.", "I have a steady job.")),
    ConditionTemplate(
        "care-relative", "you care for a relative", "paraphrase",
        ("I look after my elderly mother every day.", "I care for my disabled brother."),
        ("Nobody depends on my care.", "I do not look after anyone.")),
)

_OUTCOME_VERBS = ("apply for", "claim", "get", "renew", "join")
_OUTCOME_TOPICS = (
    ("startup", "loan"), ("winter", "payment"), ("housing", "grant"),
    ("travel", "card"), ("tax", "relief"), ("pension", "credit"),
    ("childcare", "support"), ("legal", "aid"), ("parking", "permit"),
    ("training", "course"), ("flood", "fund"), ("bus", "pass"),
    ("fishing", "licence"), ("solar", "rebate"), ("market", "stall"),
    ("library", "membership"), ("visa", "extension"), ("farm", "subsidy"),
    ("art", "award"), ("energy", "voucher"), ("water", "discount"),
    ("bridge", "toll waiver"), ("forest", "permit"), ("harbour", "berth"),
    ("museum", "season ticket"), ("cycling", "scheme"), ("heating", "allowance"),
    ("studio", "tenancy"), ("orchard", "lease"), ("wedding", "licence"),
    ("repair", "voucher"), ("export", "certificate"), ("radio", "licence"),
    ("teaching", "bursary"), ("nursing", "stipend"), ("archive", "access pass"),
    ("allotment", "plot"), ("ferry", "concession"), ("ski", "pass"),
    ("festival", "stall permit"),
)


def _build_outcomes() -> tuple[OutcomeTemplate, ...]:
    out = []
    for i, (topic, thing) in enumerate(_OUTCOME_TOPICS):
        verb = _OUTCOME_VERBS[i % len(_OUTCOME_VERBS)]
        out.append(OutcomeTemplate(f"{topic}-{thing.replace(' ', '-')}",
                                   f"{verb} the {topic} {thing}"))
    return tuple(out)


OUTCOMES: tuple[OutcomeTemplate, ...] = _build_outcomes()

CONDITIONS_BY_KEY = {c.key: c for c in CONDITIONS}
