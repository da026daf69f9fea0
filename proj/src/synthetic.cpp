#include "fluxmem/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "fluxmem/error.hpp"
#include "fluxmem/random.hpp"

namespace fluxmem::synthetic {

namespace {

using evalkit::BenchmarkCase;
using evalkit::Turn;

constexpr Timestamp kEpoch = 1'700'000'000;
constexpr Timestamp kDay = 86'400;
constexpr const char* kUser = "user";
constexpr const char* kAgent = "assistant";
constexpr const char* kAck = "I noted that.";

std::string fill(std::string text, const std::vector<std::pair<std::string, std::string>>& slots) {
  for (const auto& [key, value] : slots) {
    const std::string token = "{" + key + "}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos)) {
      text.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return text;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.index(items.size())];
}

/// `count` distinct items in random order.
template <typename T>
std::vector<T> sample(Rng& rng, std::vector<T> items, std::size_t count) {
  rng.shuffle(items);
  items.resize(std::min(count, items.size()));
  return items;
}

struct Builder {
  BenchmarkCase c;

  // Appends a page to the current conversation session and returns its id.
  std::string page(const std::string& user, Timestamp ts, const std::string& agent = kAck) {
    if (c.conversation.empty()) c.conversation.emplace_back();
    auto& session = c.conversation.back();
    session.push_back({kUser, user, ts});
    session.push_back({kAgent, agent, ts});
    return "D" + std::to_string(c.conversation.size()) + ":" + std::to_string(session.size() / 2);
  }
  void new_session() { c.conversation.emplace_back(); }
};

// ---- temporal ---------------------------------------------------------------------------

struct Attribute {
  std::string question;
  std::string stale;   // earlier states; carries more of the question's words
  std::string latest;  // the current state
  std::vector<std::string> values;
};

const std::vector<Attribute>& attributes() {
  static const std::vector<Attribute> list = {
      {"Which phone plan am I on now?",
       "My diary note for today: I am on the {v} phone plan now, it has unlimited data.",
       "My diary note for today: today I switched my phone plan over to {v}.",
       {"Mint", "Tello", "Visible", "Ting", "Lyca", "Boost", "Ultra", "Cricket"}},
      {"Which gym am I a member of now?",
       "My diary note for today: I am a member of the {v} gym now, it opens early.",
       "My diary note for today: today I joined the {v} gym as a member.",
       {"Ironworks", "Pulse", "Summit", "Anchor", "Forge", "Atlas", "Vertex", "Harbor"}},
      {"Which car am I driving now?",
       "My diary note for today: I am driving the {v} car now, it is reliable.",
       "My diary note for today: today I started driving my new {v} car.",
       {"Corolla", "Civic", "Golf", "Mazda3", "Outback", "Prius", "Impreza", "Jetta"}},
      {"Which team am I on at work now?",
       "My diary note for today: I am on the {v} team at work now, the standups are short.",
       "My diary note for today: today I moved over to the {v} team at work.",
       {"Payments", "Search", "Billing", "Platform", "Mobile", "Growth", "Security", "Data"}},
      {"Which book club am I in now?",
       "My diary note for today: I am in the {v} book club now, it meets on Mondays.",
       "My diary note for today: today I joined the {v} book club.",
       {"Inkwell", "Chapter", "Margins", "Bookmark", "Folio", "Quire", "Spine", "Verso"}},
  };
  return list;
}

const std::vector<std::string>& daily_fillers() {
  static const std::vector<std::string> list = {
      "My diary note for today: the dog needed a long walk along the river.",
      "My diary note for today: we made lentil soup for dinner tonight.",
      "My diary note for today: the neighbors hosted a small barbecue.",
      "My diary note for today: a documentary about whales kept me up late.",
      "My diary note for today: the garage finally got cleaned out.",
      "My diary note for today: our bread came out with too much salt.",
      "My diary note for today: grandma called and we chatted for an hour.",
      "My diary note for today: the squeaky door hinge got some oil.",
      "My diary note for today: a pottery class took up the whole afternoon.",
      "My diary note for today: the laundry pile got folded at last.",
      "My diary note for today: rain kept everybody indoors all day.",
      "My diary note for today: the mystery novel had a silly ending.",
      "My diary note for today: we repainted the hallway a pale green.",
      "My diary note for today: the farmers market had great peaches.",
      "My diary note for today: a long nap fixed the headache.",
      "My diary note for today: the kids built a fort out of blankets.",
  };
  return list;
}

BenchmarkCase temporal_case(Rng& rng, std::string id) {
  const auto& attr = pick(rng, attributes());
  const auto values = sample(rng, attr.values, 6);
  const auto fillers = sample(rng, daily_fillers(), 16);
  Builder b;
  b.c.id = std::move(id);
  b.c.category = "temporal";

  // One page a day: five stale states on alternate days, the latest state a few days later,
  // then quiet days.
  const std::array<char, 24> plan = {'s', '.', 's', '.', 's', '.', 's', '.', 's', '.', '.', '.',
                                     '.', '.', '.', '.', '.', 'L', '.', '.', '.', '.', '.', '.'};
  std::size_t stale = 0;
  std::size_t filler = 0;
  for (std::size_t day = 0; day < plan.size(); ++day) {
    if (day > 0) b.new_session();
    const Timestamp ts = kEpoch + static_cast<Timestamp>(day) * kDay +
                         static_cast<Timestamp>(rng.index(3600));
    if (plan[day] == '.') {
      b.page(fillers[filler++ % fillers.size()], ts);
    } else if (plan[day] == 's') {
      b.page(fill(attr.stale, {{"v", values[stale++]}}), ts);
    } else {
      b.c.gold_evidence_ids = {b.page(fill(attr.latest, {{"v", values[5]}}), ts)};
    }
  }
  b.c.question = attr.question;
  b.c.gold_answer = values[5];
  return b.c;
}

// ---- entity -----------------------------------------------------------------------------

const std::vector<std::string>& names() {
  static const std::vector<std::string> list = {
      "Alice", "Priya", "Marco",  "Hana", "Omar",  "Lucia",  "Tomas", "Greta", "Kenji", "Nadia",
      "Ravi",  "Sofia", "Elena",  "Diego", "Yusuf", "Ingrid", "Felix", "Zara", "Mateo", "Leila",
      "Bruno", "Chloe", "Dmitri", "Esme", "Farid", "Gwen",   "Hugo",  "Irene", "Jonas", "Kira"};
  return list;
}

struct Relation {
  std::string question;
  std::string link;                      // names {a} and {b}
  std::string evidence;                  // names only {b}
  std::vector<std::string> distractors;  // name {c}; each shares two words with the question
  std::vector<std::string> values;
};

const std::vector<Relation>& relations() {
  static const std::vector<Relation> list = {
      {"What job does {a}'s brother have?",
       "My diary note for today: we had lunch with {a} and {a}'s brother {b} downtown.",
       "My diary note for today: {b} told us about starting a new job as a {v} across town.",
       {"My diary note for today: {c} does have a soft spot for old radios and clocks.",
        "My diary note for today: {c}'s brother collects vintage maps and postcards.",
        "My diary note for today: what {c} cooked for the potluck does deserve praise.",
        "My diary note for today: {c} will have the spare keys until the brother returns.",
        "My diary note for today: {c}'s garden does well in the shade this year.",
        "My diary note for today: the job fair {c} organized does draw big crowds."},
       {"carpenter", "nurse", "pilot", "chef", "plumber", "teacher", "welder", "dentist"}},
      {"Where does {a}'s sister live?",
       "My diary note for today: we ran into {a} and {a}'s sister {b} at the station.",
       "My diary note for today: {b} sent photos of the new flat, the plan is to live in {v}.",
       {"My diary note for today: {c} does live close to the old stadium downtown.",
        "My diary note for today: {c}'s sister paints murals for local cafes.",
        "My diary note for today: where {c} parked the van does not matter much.",
        "My diary note for today: {c} wants to live near a sister someday.",
        "My diary note for today: {c}'s kitchen does smell of cinnamon every morning.",
        "My diary note for today: where {c} will live after graduation is undecided."},
       {"Lisbon", "Oslo", "Kyoto", "Denver", "Nairobi", "Quebec", "Seville", "Tallinn"}},
      {"What pet does {a}'s roommate have?",
       "My diary note for today: we stopped by to see {a} and {a}'s roommate {b} yesterday.",
       "My diary note for today: {b} finally brought home a {v} as a pet from the shelter.",
       {"My diary note for today: {c} does have a habit of humming while cooking.",
        "My diary note for today: {c}'s roommate plays loud drums at night.",
        "My diary note for today: what {c} built for the school fair does impress everyone.",
        "My diary note for today: {c} will have a new roommate by the autumn.",
        "My diary note for today: {c}'s bakery does sell the best rye bread.",
        "My diary note for today: the pet store {c} runs does brisk business."},
       {"parrot", "beagle", "tortoise", "ferret", "hamster", "kitten", "iguana", "rabbit"}},
      {"What sport does {a}'s cousin play?",
       "My diary note for today: we watched a movie with {a} and {a}'s cousin {b} last night.",
       "My diary note for today: {b} signed up to play {v} every Sunday at the club.",
       {"My diary note for today: {c} does play the cello in a small quartet.",
        "My diary note for today: {c}'s cousin restores antique furniture.",
        "My diary note for today: what {c} said at the meeting does make sense.",
        "My diary note for today: {c} and a cousin run a food truck together.",
        "My diary note for today: {c}'s sport of choice does change every summer.",
        "My diary note for today: {c} will play host at the reunion in June."},
       {"rugby", "tennis", "cricket", "volleyball", "badminton", "hockey", "squash", "lacrosse"}},
  };
  return list;
}

const std::vector<std::string>& social_fillers() {
  static const std::vector<std::string> list = {
      "My diary note for today: we went bowling with {x} and {y} after work.",
      "My diary note for today: my neighbor {x} lent me a ladder.",
      "My diary note for today: the book swap met at {x}'s place.",
      "My diary note for today: we carpooled with {x} to the concert.",
      "My diary note for today: the barbecue at {x}'s house ran late.",
      "My diary note for today: my colleague {x} recommended a podcast.",
      "My diary note for today: we helped {x} and {y} move furniture.",
      "My diary note for today: the hike with {x} was muddy.",
  };
  return list;
}

BenchmarkCase entity_case(Rng& rng, std::string id) {
  const auto& rel = pick(rng, relations());
  const auto people = sample(rng, names(), 20);
  const auto& value = pick(rng, rel.values);
  const auto fillers = sample(rng, social_fillers(), 8);
  const auto distractors = sample(rng, rel.distractors, 5);

  Builder bld;
  bld.c.id = std::move(id);
  bld.c.category = "entity";
  Timestamp ts = kEpoch + static_cast<Timestamp>(rng.index(30)) * kDay;
  auto next = [&] { return ts += 300 + static_cast<Timestamp>(rng.index(300)); };

  // people[0] is asked about, people[1] is the relative; everyone else appears once.
  std::size_t person = 2;
  std::size_t filler = 0;
  auto social = [&] {
    const auto& x = people[person++];
    const auto& y = people[person++];
    return fill(fillers[filler++ % fillers.size()], {{"x", x}, {"y", y}});
  };
  const std::vector<std::pair<std::string, std::string>> pair = {{"a", people[0]},
                                                                 {"b", people[1]}};

  const auto link_id = bld.page(fill(rel.link, pair), next());
  const auto evidence_id = bld.page(fill(rel.evidence, {pair[1], {"v", value}}), next());
  bld.page(social(), next());
  for (std::size_t i = 0; i < distractors.size(); ++i) {
    bld.page(fill(distractors[i], {{"c", people[person++]}}), next());
    if (i % 2 == 1) bld.page(social(), next());
  }
  for (int i = 0; i < 4; ++i) bld.page(social(), next());

  bld.c.question = fill(rel.question, {{"a", people[0]}});
  bld.c.gold_answer = value;
  bld.c.gold_evidence_ids = {link_id, evidence_id};
  return bld.c;
}

// ---- topic ------------------------------------------------------------------------------

struct Topic {
  std::string place;               // questions ask "What did I add to the <place> ...?"
  std::string evidence;            // {v} is the answer
  std::string companion;           // an ordinary page that also names the place
  std::vector<std::string> values;
  std::vector<std::string> pages;  // ordinary pages, heavy on the topic's vocabulary
  std::string echo;                // {f} takes a clause that echoes the question
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> list = {
      {"garden beds",
       "My diary note for today: {v} seedlings went into the garden beds, soil got compost and mulch.",
       "My diary note for today: garden beds weeded, garden soil got compost and mulch, garden hose coiled.",
       {"zucchini", "pepper", "carrot", "basil", "kale", "radish", "bean", "squash"},
       {"My diary note for today: the garden soil needed compost, the garden beds and garden paths got mulch.",
        "My diary note for today: watering garden beds and weeding garden soil took a whole garden hour.",
        "My diary note for today: garden tomatoes need stakes, the garden beds look crowded with garden weeds.",
        "My diary note for today: slugs ate garden lettuce, so garden beds got copper tape and garden nets.",
        "My diary note for today: the garden hose leaks, watering garden beds and garden pots is slow."},
       "My diary note for today: {f}, garden soil got compost and the garden beds got garden mulch."},
      {"kitchen shelves",
       "My diary note for today: a {v} arrived for the kitchen shelves, oven cleaned, dough and pots stacked.",
       "My diary note for today: kitchen shelves reorganized, kitchen oven cleaned, kitchen pots and dough bowls stacked.",
       {"blender", "toaster", "grinder", "kettle", "wok", "juicer", "steamer", "skillet"},
       {"My diary note for today: the kitchen oven bakes unevenly, a kitchen timer and kitchen thermometer help.",
        "My diary note for today: kitchen knives got sharpened, kitchen boards scrubbed, kitchen oven cleaned.",
        "My diary note for today: sourdough rose in the warm kitchen, kitchen oven hot, kitchen dough ready.",
        "My diary note for today: kitchen sauce simmered, kitchen oven roasted vegetables, kitchen pots piled up.",
        "My diary note for today: the kitchen mixer kneaded dough, kitchen counters dusted with kitchen flour."},
       "My diary note for today: {f}, kitchen oven baked dough and the kitchen mixer kneaded kitchen bread."},
      {"bike frame",
       "My diary note for today: a {v} went on the bike frame, chain oiled, gears tuned, tires pumped.",
       "My diary note for today: bike frame scrubbed, bike chain oiled, bike tires pumped, bike gears tuned.",
       {"basket", "bell", "rack", "mirror", "fender", "kickstand", "bottle cage", "horn"},
       {"My diary note for today: the bike chain slipped twice on the bike trail, bike gears need tuning.",
        "My diary note for today: new bike tires made the bike ride smoother on the gravel bike trail.",
        "My diary note for today: the bike ride covered forty miles, bike pedals squeaked, bike seat hurt.",
        "My diary note for today: cleaning the bike chain after a muddy bike trail, bike frame scrubbed.",
        "My diary note for today: bike lights charged, bike helmet strapped, bike commute in the rain."},
       "My diary note for today: {f}, bike chain got oiled and the bike tires pumped for a bike ride."},
      {"guitar case",
       "My diary note for today: a {v} went into the guitar case, strings changed, chords and scales practiced.",
       "My diary note for today: guitar case cleaned, guitar strings changed, guitar chords and scales practiced.",
       {"capo", "strap", "pickup", "tuner", "humidifier", "nut", "bridge pin", "slide"},
       {"My diary note for today: guitar practice on chords, guitar strings buzz during guitar scales.",
        "My diary note for today: the guitar lesson covered barre chords and guitar scales, guitar tuned.",
        "My diary note for today: new guitar strings sound bright, guitar practice with the guitar amp.",
        "My diary note for today: guitar band practice ran long, the guitar amp hummed, guitar cable frayed.",
        "My diary note for today: guitar chords every evening, guitar calluses forming, guitar picks lost."},
       "My diary note for today: {f}, guitar practice on guitar chords with the guitar amp loud."},
      {"aquarium tank",
       "My diary note for today: {v} went into the aquarium tank, filter rinsed, water tested, plants trimmed.",
       "My diary note for today: aquarium tank cleaned, aquarium filter rinsed, aquarium water tested, plants trimmed.",
       {"guppies", "tetras", "plecos", "shrimp", "snails", "mollies", "danios", "rasboras"},
       {"My diary note for today: aquarium water changed, aquarium filter rinsed, aquarium glass scraped.",
        "My diary note for today: the aquarium heater died, aquarium fish huddled near the aquarium pump.",
        "My diary note for today: aquarium plants grew fast, aquarium gravel vacuumed, aquarium lid fixed.",
        "My diary note for today: aquarium fish food running low, aquarium lights on a timer now.",
        "My diary note for today: testing aquarium water, aquarium nitrates high, aquarium filter upgraded."},
       "My diary note for today: {f}, aquarium filter rinsed and aquarium water changed for aquarium fish."},
      {"camera bag",
       "My diary note for today: a {v} went into the camera bag, tripod and shutter tested on photos.",
       "My diary note for today: camera bag sorted, camera tripod and camera shutter tested on photos.",
       {"lens", "flash", "grip", "remote", "hood", "battery", "cage", "monopod"},
       {"My diary note for today: camera settings tweaked, camera shutter speed slow, camera tripod steady.",
        "My diary note for today: the camera sensor needed cleaning, camera lens caps lost, camera bag sorted.",
        "My diary note for today: camera photos of the harbor, camera exposure bracketed, camera battery low.",
        "My diary note for today: camera autofocus hunting at dusk, camera tripod legs stiff, camera reset.",
        "My diary note for today: printing camera photos, camera memory cards full, camera files backed up."},
       "My diary note for today: {f}, camera photos with the camera tripod and camera shutter timer."},
      {"workshop bench",
       "My diary note for today: a {v} arrived for the workshop bench, tools and clamps sorted.",
       "My diary note for today: workshop bench cleared, workshop tools and clamps sorted, workshop floor swept.",
       {"drill press", "vise", "bandsaw", "lathe", "router", "sander", "jigsaw", "planer"},
       {"My diary note for today: workshop bench sanded, workshop tools hung, workshop floor swept.",
        "My diary note for today: the workshop saw blade dulled, workshop clamps everywhere, workshop dusty.",
        "My diary note for today: building shelves in the workshop, workshop glue drying, workshop lamp on.",
        "My diary note for today: workshop drill bits sorted, workshop screws labeled, workshop vacuum run.",
        "My diary note for today: the workshop heater helps, workshop varnish curing, workshop window open."},
       "My diary note for today: {f}, workshop bench sanded and workshop tools hung on the workshop wall."},
  };
  return list;
}

// Opening clauses that repeat different subsets of the question's words, so echo pages
// resemble the question without resembling one another.
const std::vector<std::string>& echo_clauses() {
  static const std::vector<std::string> list = {
      "this {when} I did add a few things",
      "what I had to add was simple",
      "as usual I did add to the routine",
      "what did the trick was to add patience",
      "I had to add one more chore this {when}",
      "what a {when} it was, I did add a lot",
  };
  return list;
}

BenchmarkCase topic_case(Rng& rng, std::string id) {
  const auto& all = topics();
  const std::size_t home = rng.index(all.size());
  const std::string when = pick(rng, std::vector<std::string>{"spring", "month", "week"});
  const auto& value = pick(rng, all[home].values);
  const auto clauses = sample(rng, echo_clauses(), echo_clauses().size());

  Builder b;
  b.c.id = std::move(id);
  b.c.category = "topic";
  Timestamp ts = kEpoch + static_cast<Timestamp>(rng.index(30)) * kDay;
  auto next = [&] { return ts += 600 + static_cast<Timestamp>(rng.index(600)); };

  std::vector<std::size_t> others;
  for (std::size_t t = 0; t < all.size(); ++t) {
    if (t != home) others.push_back(t);
  }
  rng.shuffle(others);

  // The asked-about topic: its companion page, then the evidence page. Every other topic: an
  // ordinary page and an echo page, then two more ordinary pages later in the conversation.
  b.page(all[home].companion, next());
  const auto evidence_id = b.page(fill(all[home].evidence, {{"v", value}}), next());
  std::vector<std::vector<std::string>> later;
  for (std::size_t i = 0; i < others.size(); ++i) {
    const auto& topic = all[others[i]];
    const auto pages = sample(rng, topic.pages, 3);
    b.page(pages[0], next());
    b.page(fill(topic.echo, {{"f", fill(clauses[i % clauses.size()], {{"when", when}})}}), next());
    later.push_back({pages[1], pages[2]});
  }
  for (std::size_t round = 0; round < 2; ++round) {
    for (const auto& pages : later) b.page(pages[round], next());
  }

  b.c.question = "What did I add to the " + all[home].place + " this " + when + "?";
  b.c.gold_answer = value;
  b.c.gold_evidence_ids = {evidence_id};
  return b.c;
}

}  // namespace

std::string_view to_string(Pattern pattern) {
  switch (pattern) {
    case Pattern::Temporal: return "temporal";
    case Pattern::Entity: return "entity";
    case Pattern::Topic: return "topic";
  }
  return "temporal";
}

std::vector<selector::LabeledExample> cluster_dataset(std::size_t count, std::uint64_t seed) {
  using selector::kFeatureCount;
  // Centres loosely follow what each structure's conversations look like; spreads are small
  // relative to the distance between centres.
  static constexpr std::array<std::array<double, kFeatureCount>, 3> centre = {{
      {8, 18, 0.5, 0.1, 2, 0.3, 0, 0, 0, 160, 0.05, 0.60},
      {8, 22, 3.0, 0.8, 2, 0.3, 0, 0, 1, 1.0, 8.0, 0.60},
      {8, 20, 0.3, 0.1, 4, 0.7, 0, 0, 0, 1.5, 5.0, 0.85},
  }};
  static constexpr std::array<double, kFeatureCount> spread = {0, 3, 0.3, 0.1, 0.5, 0.08,
                                                               0, 0, 0, 20, 1.0, 0.05};
  Rng rng(seed);
  std::vector<selector::LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = i % 3;
    selector::LabeledExample ex;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      ex.features[f] = std::max(0.0, centre[k][f] + spread[f] * rng.normal());
    }
    ex.label = static_cast<StructureKind>(k);
    ex.rewards[k] = 1.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "cluster-%03zu", i);
    ex.source = buf;
    out.push_back(ex);
  }
  return out;
}

evalkit::BenchmarkCase make_case(Pattern pattern, std::uint64_t seed, std::string id) {
  Rng rng(seed);
  switch (pattern) {
    case Pattern::Temporal: return temporal_case(rng, std::move(id));
    case Pattern::Entity: return entity_case(rng, std::move(id));
    case Pattern::Topic: return topic_case(rng, std::move(id));
  }
  throw InvalidArgument("unknown pattern");
}

std::vector<evalkit::BenchmarkCase> mixed_suite(std::size_t per_pattern, std::uint64_t seed,
                                                const std::string& prefix) {
  std::vector<evalkit::BenchmarkCase> out;
  Rng seeds(seed);
  for (const auto pattern : {Pattern::Temporal, Pattern::Entity, Pattern::Topic}) {
    for (std::size_t i = 0; i < per_pattern; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%02zu", i + 1);
      out.push_back(make_case(pattern, seeds.next(),
                              prefix + "-" + std::string(to_string(pattern)) + "-" + buf));
    }
  }
  return out;
}

std::vector<TranscriptLine> demo_transcript() {
  const Timestamp t0 = kEpoch;
  return {
      {"Hi! I just moved to Lisbon for a new job.", "Welcome to Lisbon! What is the job?",
       t0},
      {"I work as a data engineer at a logistics startup.",
       "Nice, logistics has plenty of data problems.", t0 + 120},
      {"My sister Ana visits next month.", "Do you have plans for her visit?", t0 + 300},
      {"We want to hike in Sintra together.", "Sintra has lovely trails.", t0 + 420},
      {"I adopted a cat named Pixel last week.", "Congratulations on adopting Pixel!",
       t0 + 3600},
      {"Pixel loves sleeping on my keyboard.", "Cats do like warm keyboards.", t0 + 3720},
      {"I prefer tea over coffee in the mornings.", "Noted, tea in the mornings.", t0 + 7200},
      {"My favorite tea is jasmine green tea.", "Jasmine green tea is a great choice.",
       t0 + 7320},
      {"Work is busy because we launch a new route planner.",
       "Good luck with the route planner launch.", t0 + 86400},
      {"Ana said she will bring pastel de nata recipes.",
       "That sounds like a tasty visit.", t0 + 86520},
  };
}

}  // namespace fluxmem::synthetic
