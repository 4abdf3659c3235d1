"""Seeded generator for the synthetic versioned-policy corpus and its queries.

Every topic is one document (a policy template for one site and staff group)
with a chain of canonical versions whose numeric value trends in one
direction. A share of topics also gets a recent low-authority chat "rumor"
quoting a value that no canonical version ever had.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from smartvector.core import (
    SourceAuthority,
    VectorStatus,
    VectorStore,
    add_edge,
    format_ts,
    ingest_document,
    parse_ts,
    transition,
)

DAY = timedelta(days=1)


@dataclass(frozen=True)
class Template:
    key: str
    names: tuple[str, ...]  # terminology variants; the policy name drifts between revisions
    unit: str
    start: tuple[int, int]  # range of the first version's value
    step: tuple[int, int]  # per-revision change (absolute)
    direction: int  # +1 values grow, -1 values shrink
    chatter: str  # rumor frame with {contact}, {site}, {group}, {name}, {value}, {unit}


TEMPLATES: tuple[Template, ...] = (
    Template("parental-leave", ("parental leave", "paid parental leave", "parental leave allowance"), "days",
             (30, 60), (10, 20), +1,
             "{contact} says {site} {group} {name} is {value} {unit} now"),
    Template("vpn-timeout", ("VPN idle timeout", "VPN session timeout", "VPN idle cutoff"), "minutes",
             (45, 90), (5, 10), -1,
             "{contact} mentioned {site} {group} {name} is {value} {unit} now"),
    Template("per-diem", ("per diem limit", "daily per diem", "per diem allowance"), "dollars",
             (60, 90), (8, 15), +1,
             "{contact} posted {site} {group} {name} is {value} {unit} now"),
    Template("incident-sla", ("incident response SLA", "incident response target", "incident acknowledgement SLA"), "minutes",
             (60, 120), (10, 20), -1,
             "{contact} claims {site} {group} {name} is {value} {unit} now"),
    Template("backup-retention", ("backup retention period", "backup retention window", "snapshot backup retention"), "days",
             (30, 60), (15, 30), +1,
             "{contact} heard {site} {group} {name} is {value} {unit} now"),
    Template("release-freeze", ("release freeze window", "release freeze period", "code release freeze"), "days",
             (5, 10), (2, 4), +1,
             "{contact} thinks {site} {group} {name} is {value} {unit} now"),
    Template("password-rotation", ("password rotation interval", "password expiry interval", "password rotation cycle"), "days",
             (90, 120), (10, 20), -1,
             "{contact} wrote {site} {group} {name} is {value} {unit} now"),
    Template("expense-approval", ("expense approval threshold", "expense approval limit", "expense signoff threshold"), "dollars",
             (500, 1000), (250, 500), +1,
             "{contact} insists {site} {group} {name} is {value} {unit} now"),
    Template("laptop-refresh", ("laptop refresh cycle", "laptop replacement cycle", "laptop refresh term"), "months",
             (48, 60), (4, 8), -1,
             "{contact} reckons {site} {group} {name} is {value} {unit} now"),
    Template("oncall-rotation", ("oncall rotation length", "oncall shift length", "oncall rotation term"), "days",
             (5, 7), (2, 3), +1,
             "{contact} swears {site} {group} {name} is {value} {unit} now"),
    Template("log-retention", ("log retention limit", "log retention horizon", "audit log retention"), "days",
             (90, 180), (30, 60), +1,
             "{contact} says {site} {group} {name} is {value} {unit} now"),
    Template("training-budget", ("training budget", "annual training budget", "training allowance"), "dollars",
             (1000, 1500), (250, 500), +1,
             "{contact} mentioned {site} {group} {name} is {value} {unit} now"),
    Template("api-rate-limit", ("API rate limit", "API request quota", "API rate ceiling"), "requests",
             (600, 1200), (200, 400), +1,
             "{contact} posted {site} {group} {name} is {value} {unit} now"),
    Template("review-coverage", ("review coverage target", "code review quota", "review coverage goal"), "percent",
             (50, 60), (5, 10), +1,
             "{contact} claims {site} {group} {name} is {value} {unit} now"),
    Template("vendor-terms", ("vendor payment terms", "vendor payment window", "supplier payment terms"), "days",
             (60, 90), (10, 15), -1,
             "{contact} heard {site} {group} {name} is {value} {unit} now"),
    Template("access-review", ("access review cadence", "access review interval", "privileged access review"), "days",
             (180, 365), (30, 60), -1,
             "{contact} thinks {site} {group} {name} is {value} {unit} now"),
    Template("meal-allowance", ("late meal allowance", "late meal credit", "night meal allowance"), "dollars",
             (15, 25), (3, 6), +1,
             "{contact} wrote {site} {group} {name} is {value} {unit} now"),
    Template("sick-leave", ("paid sick leave", "sick leave allowance", "sick day quota"), "days",
             (8, 12), (2, 4), +1,
             "{contact} insists {site} {group} {name} is {value} {unit} now"),
    Template("overtime-cap", ("overtime cap", "monthly overtime cap", "overtime hours limit"), "hours",
             (40, 60), (5, 10), -1,
             "{contact} reckons {site} {group} {name} is {value} {unit} now"),
    Template("badge-expiry", ("visitor badge validity", "visitor pass validity", "visitor badge lifetime"), "hours",
             (24, 48), (6, 12), -1,
             "{contact} swears {site} {group} {name} is {value} {unit} now"),
)

SITES: tuple[str, ...] = (
    "Berlin", "Austin", "Singapore", "Toronto", "Lagos", "Osaka", "Lisbon", "Denver",
    "Nairobi", "Krakow", "Melbourne", "Bogota", "Dublin", "Pune", "Seoul", "Zurich",
    "Oslo", "Recife", "Tallinn", "Manila", "Boston", "Cairo", "Lyon", "Quito",
)

GROUPS: tuple[str, ...] = (
    "retail associates", "finance analysts", "warehouse crews", "field technicians",
    "support agents", "platform engineers", "sales representatives", "lab researchers",
    "legal counsel", "design studio", "data scientists", "clinic nurses",
    "logistics planners", "security officers", "content editors", "procurement buyers",
    "payroll clerks", "hardware testers", "marketing producers", "facilities staff",
    "call center", "network operators", "audit partners", "tax advisors",
    "mobile developers", "brand strategists", "fleet drivers", "pharmacy interns",
    "research fellows", "quality inspectors", "customs brokers", "translation desk",
    "recruiting coordinators", "treasury dealers", "cloud architects", "store managers",
    "events crew", "claims adjusters", "benefits counselors", "robotics lab",
    "video producers", "kitchen team", "wellness coaches", "mailroom clerks",
    "firmware squad", "billing specialists", "localization vendors", "grants office",
    "archive librarians", "graduate trainees", "compliance reviewers", "loan underwriters",
    "game artists", "sound engineers", "transit dispatchers", "solar installers",
    "chemistry faculty", "ticketing desk", "pilot trainees", "horticulture team",
)

FIRST_NAMES: tuple[str, ...] = (
    "Maria", "Kenji", "Ama", "Lars", "Priya", "Diego", "Noor", "Ivan", "Chloe", "Tomasz",
    "Wanjiru", "Mateo", "Aiko", "Femi", "Greta", "Rahul", "Sofia", "Yusuf", "Ingrid", "Bao",
    "Leila", "Oskar", "Zanele", "Hiro",
)
LAST_NAMES: tuple[str, ...] = (
    "Okafor", "Tanaka", "Lindqvist", "Moreau", "Haddad", "Novak", "Silva", "Reyes", "Brennan",
    "Kowalski", "Mwangi", "Castillo", "Ferreira", "Nakamura", "Osei", "Petrov", "Quispe",
    "Rasmussen", "Sato", "Tremblay", "Umarov", "Vargas", "Weber", "Yilmaz",
)

CANONICAL_AUTHORITIES = (
    SourceAuthority.OFFICIAL_DB,
    SourceAuthority.POLICY,
    SourceAuthority.TECH_DOC,
    SourceAuthority.WIKI,
)


@dataclass(frozen=True)
class BenchConfig:
    seed: int = 7
    n_topics: int = 60
    n_templates: int = 20
    versions_per_topic: int = 4
    window_days: tuple[int, int] = (240, 420)
    interval_days: tuple[int, int] = (40, 90)
    rumor_rate: float = 0.30
    rumor_age_days: tuple[int, int] = (1, 10)
    rumor_authority: SourceAuthority = SourceAuthority.CHAT
    dependency_stride: int = 5
    canonical_authorities: tuple[SourceAuthority, ...] = CANONICAL_AUTHORITIES
    # probability that a revision renames the policy (terminology drift)
    rename_rate: float = 0.3
    # a canonical version earns one upvote per this many days it was in force
    feedback_days_per_vote: float = 3.0
    # age of the newest canonical version at the reference time
    latest_age_days: tuple[int, int] = (0, 30)
    # versions written within this many days of the reference time use the newer house style
    style_cutover_days: int = 35
    now: str = "2026-01-15T00:00:00Z"

    def __post_init__(self) -> None:
        for name in ("window_days", "interval_days", "rumor_age_days", "latest_age_days"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range is empty")
        if not 0 <= self.rumor_rate <= 1:
            raise ValueError("rumor_rate must lie in [0, 1]")
        if not 0 <= self.rename_rate <= 1:
            raise ValueError("rename_rate must lie in [0, 1]")
        if self.n_topics > len(GROUPS):
            raise ValueError(f"at most {len(GROUPS)} topics are supported")
        if self.n_templates > len(TEMPLATES):
            raise ValueError(f"at most {len(TEMPLATES)} templates are available")
        if self.versions_per_topic < 2:
            raise ValueError("need at least two versions per topic")
        if self.feedback_days_per_vote <= 0:
            raise ValueError("feedback_days_per_vote must be positive")
        if self.latest_age_days[1] >= self.window_days[0]:
            raise ValueError("latest_age_days must end before the shortest window")

    @property
    def reference_time(self) -> datetime:
        return parse_ts(self.now)

    @property
    def n_rumors(self) -> int:
        return round(self.rumor_rate * self.n_topics)


@dataclass
class TopicTruth:
    topic_id: str
    template: str
    site: str
    group: str
    contact: str  # policy owner named in every canonical version
    names: list[str]  # per version
    values: list[int]  # per version
    created: list[str]  # RFC 3339 per version
    vector_ids: list[str]
    rumor_id: str | None = None
    rumor_value: int | None = None

    @property
    def phrase(self) -> str:
        """Current wording of the topic, as a user would ask about it today."""
        return f"{self.names[-1]} for {self.site} {self.group}"


@dataclass
class GroundTruth:
    now: str
    topics: list[TopicTruth]
    contradictions: list[tuple[str, str]] = field(default_factory=list)  # (rumor, latest canonical)
    dependencies: list[tuple[str, str]] = field(default_factory=list)  # (from, to) depends_on

    def topic(self, topic_id: str) -> TopicTruth:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise KeyError(topic_id)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> GroundTruth:
        return cls(
            now=data["now"],
            topics=[TopicTruth(**t) for t in data["topics"]],
            contradictions=[tuple(p) for p in data.get("contradictions", [])],
            dependencies=[tuple(p) for p in data.get("dependencies", [])],
        )


@dataclass(frozen=True)
class Query:
    text: str
    kind: str  # "current" | "time_point" | "conflict"
    reference_time: datetime
    gold_topic: str
    gold_version: int

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "kind": self.kind,
            "reference_time": format_ts(self.reference_time),
            "gold_topic": self.gold_topic,
            "gold_version": self.gold_version,
        }

    @classmethod
    def from_json(cls, data: dict) -> Query:
        return cls(
            text=data["text"],
            kind=data["kind"],
            reference_time=parse_ts(data["reference_time"]),
            gold_topic=data["gold_topic"],
            gold_version=int(data["gold_version"]),
        )


def _values(rng: random.Random, tpl: Template, n: int) -> list[int]:
    """Strictly monotone series; decreasing series keep room for a rumor below them."""
    start = rng.randint(*tpl.start)
    steps = [rng.randint(*tpl.step) for _ in range(n - 1)]
    if tpl.direction < 0:
        start = max(start, sum(steps) + 2 * tpl.step[1] + 1)
    out = [start]
    for step in steps:
        out.append(out[-1] + tpl.direction * step)
    return out


def _names(rng: random.Random, tpl: Template, n: int, rename_rate: float) -> list[str]:
    current = rng.randrange(len(tpl.names))
    names = [tpl.names[current]]
    for _ in range(n - 1):
        if rng.random() < rename_rate:
            current = rng.choice([i for i in range(len(tpl.names)) if i != current])
        names.append(tpl.names[current])
    return names


def _schedule(rng: random.Random, config: BenchConfig, now: datetime) -> list[datetime]:
    """Creation dates of the canonical versions, oldest first, all before ``now``."""
    n = config.versions_per_topic
    lag = rng.randint(*config.latest_age_days)
    gaps = [rng.randint(*config.interval_days) for _ in range(n - 1)]
    # stretch the gaps so the whole history spans a window_days draw
    span = rng.randint(*config.window_days)
    scale = (span - lag) / sum(gaps)
    gaps = [g * scale for g in gaps]
    dates = [now - lag * DAY]
    for g in reversed(gaps):
        dates.append(dates[-1] - round(g) * DAY)
    return dates[::-1]


def _rumor_value(rng: random.Random, tpl: Template, values: list[int]) -> int:
    """A plausible but wrong value: one or two steps past the latest, never canonical."""
    while True:
        candidate = values[-1] + tpl.direction * rng.randint(1, 2) * rng.randint(*tpl.step)
        if candidate > 0 and candidate not in values:
            return candidate


def _canonical_text(
    tpl: Template,
    site: str,
    group: str,
    name: str,
    value: int,
    created: datetime,
    contact: str,
    config: BenchConfig,
) -> str:
    """Policy text in the house style in force when the version was written."""
    cutover = config.reference_time - config.style_cutover_days * DAY
    if created < cutover:
        return f"Current {site} {group} {name}: {value} {tpl.unit} ({contact})."
    return f"{site} {group} {name} as of revision: {value} {tpl.unit} ({contact})."


def _feedback(rng: random.Random, config: BenchConfig, lifetime_days: float) -> tuple[int, int]:
    """Upvotes grow with time in force; up to a quarter as many downvotes."""
    pos = 1 + int(lifetime_days // config.feedback_days_per_vote)
    return pos, rng.randint(0, pos // 4)


def generate_corpus(config: BenchConfig = BenchConfig()) -> tuple[VectorStore, GroundTruth]:
    rng = random.Random(config.seed)
    now = config.reference_time
    store = VectorStore()
    templates = TEMPLATES[: config.n_templates]
    truth = GroundTruth(now=format_ts(now), topics=[])
    # every topic serves its own staff group
    groups = rng.sample(GROUPS, config.n_topics)

    for idx in range(config.n_topics):
        tpl = templates[idx % len(templates)]
        site = SITES[rng.randrange(len(SITES))]
        while any(t.template == tpl.key and t.site == site for t in truth.topics):
            site = SITES[rng.randrange(len(SITES))]
        siblings = [t for t in truth.topics if t.template == tpl.key]
        group = groups[idx]
        first = rng.choice([n for n in FIRST_NAMES if all(not t.contact.startswith(n + " ") for t in siblings)])
        last = rng.choice([n for n in LAST_NAMES if all(not t.contact.endswith(" " + n) for t in siblings)])
        contact = f"{first} {last}"
        topic_id = f"{tpl.key}-{site.lower()}"
        values = _values(rng, tpl, config.versions_per_topic)
        names = _names(rng, tpl, config.versions_per_topic, config.rename_rate)
        dates = _schedule(rng, config, now)
        authority = config.canonical_authorities[idx % len(config.canonical_authorities)]
        ids = []
        for k, (value, name, created) in enumerate(zip(values, names, dates), start=1):
            text = _canonical_text(tpl, site, group, name, value, created, contact, config)
            valid_until = dates[k] if k < len(dates) else None
            (vid,) = ingest_document(
                store, topic_id, k, text, authority, created,
                validity_start=created, validity_end=valid_until, author=f"{tpl.key}-owner",
            )
            v = store.vectors[vid]
            lifetime = ((valid_until or now) - created).total_seconds() / 86400
            v.positive_feedback, v.negative_feedback = _feedback(rng, config, lifetime)
            ids.append(vid)
        # the history is already consolidated: the latest version is live
        transition(store, ids[-1], VectorStatus.ACTIVE, dates[-1])
        truth.topics.append(
            TopicTruth(
                topic_id=topic_id,
                template=tpl.key,
                site=site,
                group=group,
                contact=contact,
                names=names,
                values=values,
                created=[format_ts(d) for d in dates],
                vector_ids=ids,
            )
        )
    store.recent_changes.clear()

    rumor_topics = list(range(config.n_topics))
    rng.shuffle(rumor_topics)
    for idx in sorted(rumor_topics[: config.n_rumors]):
        topic = truth.topics[idx]
        tpl = templates[idx % len(templates)]
        value = _rumor_value(rng, tpl, topic.values)
        age = rng.randint(*config.rumor_age_days)
        created = now - age * DAY - rng.randint(0, 3600 * 8) * timedelta(seconds=1)
        text = tpl.chatter.format(
            name=topic.names[-1],
            site=topic.site,
            group=topic.group,
            value=value,
            unit=tpl.unit,
            contact=topic.contact,
        )
        (rid,) = ingest_document(
            store, f"{topic.topic_id}-chat", 1, text, config.rumor_authority, created,
            validity_start=created, author="chat-user",
        )
        topic.rumor_id = rid
        topic.rumor_value = value
        truth.contradictions.append((rid, topic.vector_ids[-1]))

    stride = config.dependency_stride
    for idx in range(stride, config.n_topics, stride):
        src = truth.topics[idx].vector_ids[-1]
        dst = truth.topics[idx - 1].vector_ids[-1]
        add_edge(store, src, dst, "depends_on", now)
        truth.dependencies.append((src, dst))
    return store, truth


def generate_queries(truth: GroundTruth, config: BenchConfig = BenchConfig()) -> list[Query]:
    """One current and one time-point query per topic, one conflict query per rumor."""
    rng = random.Random(f"{config.seed}-queries")
    now = parse_ts(truth.now)
    current, time_point, conflict = [], [], []
    for topic in truth.topics:
        latest = len(topic.values)
        text = f"What is the current {topic.phrase}?"
        current.append(Query(text, "current", now, topic.topic_id, latest))
        version = rng.randint(1, latest - 1)
        start = parse_ts(topic.created[version - 1])
        end = parse_ts(topic.created[version])
        seconds = int((end - start).total_seconds())
        at = start + timedelta(seconds=rng.randint(1, seconds - 1))
        time_point.append(
            Query(
                f"What was the {topic.phrase} as of {at.date().isoformat()}?",
                "time_point",
                at,
                topic.topic_id,
                version,
            )
        )
        if topic.rumor_id is not None:
            conflict.append(Query(text, "conflict", now, topic.topic_id, latest))
    return current + time_point + conflict


# -- files -----------------------------------------------------------------------


def save_queries(path: str | Path, queries: list[Query], truth: GroundTruth) -> None:
    payload = {"queries": [q.to_json() for q in queries], "ground_truth": truth.to_json()}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_queries(path: str | Path) -> tuple[list[Query], GroundTruth | None]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    queries = [Query.from_json(q) for q in data["queries"]]
    truth = GroundTruth.from_json(data["ground_truth"]) if "ground_truth" in data else None
    return queries, truth
