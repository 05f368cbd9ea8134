// Copyright 2026 The IterX-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <gtest/gtest.h>

#include "iterx/error.h"
#include "iterx/granular.h"
#include "test_util.h"

namespace iterx {
namespace {

std::shared_ptr<const Ontology> harm_ontology() {
  std::vector<TemplateType> types;
  types.push_back({"Harm",
                   {{"Agent", SlotKind::kEntity, {}, false},
                    {"Victim", SlotKind::kEntity, {}, true},
                    {"Event", SlotKind::kEvent, {}, false},
                    {"Killed", SlotKind::kBoolean, {}, false},
                    {"Severity", SlotKind::kCategorical, {"low", "high"}, false}}});
  types.push_back({"Protest", {{"Agent", SlotKind::kEntity, {}, false}}});
  return std::make_shared<const Ontology>(std::move(types));
}

Mention tiered(const std::string &id, int at, Informativity tier) {
  Mention m;
  m.id = id;
  m.left = m.right = at;
  m.informativity = tier;
  return m;
}

// Tokens: Smith the-officer he attacked Jones bombed.
Document harm_doc() {
  return Document("d",
                  {"Smith", "officer", "he", "attacked", "Jones", "bombed"},
                  {tiered("name", 0, Informativity::kName),
                   tiered("nom", 1, Informativity::kNominal),
                   tiered("pro", 2, Informativity::kPronoun),
                   tiered("ev1", 3, Informativity::kUnspecified),
                   tiered("jones", 4, Informativity::kName),
                   tiered("ev2", 5, Informativity::kUnspecified)});
}

const SlotDef &slot_def(const Ontology &ontology, const std::string &name) {
  return *ontology.find_slot(*ontology.type_index("Harm"), name);
}

Filler with_time(Filler f, std::vector<std::string> time, std::optional<Irrealis> irrealis) {
  f.time_attachments = std::move(time);
  f.irrealis = irrealis;
  return f;
}

TEST(FillerCreditTest, InformativityLadder) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  const SlotDef &agent = slot_def(*ontology, "Agent");
  const Filler full = Filler::entity({"name", "nom", "pro"});
  EXPECT_EQ(filler_credit(full, Filler::mention("name"), agent, doc), 1.0);
  EXPECT_EQ(filler_credit(full, Filler::mention("nom"), agent, doc), 0.5);
  EXPECT_EQ(filler_credit(full, Filler::mention("pro"), agent, doc), 0.25);
  const Filler no_name = Filler::entity({"nom", "pro"});
  EXPECT_EQ(filler_credit(no_name, Filler::mention("nom"), agent, doc), 1.0);
  EXPECT_EQ(filler_credit(no_name, Filler::mention("pro"), agent, doc), 0.5);
  const Filler name_pro = Filler::entity({"name", "pro"});
  EXPECT_EQ(filler_credit(name_pro, Filler::mention("pro"), agent, doc), 0.5);
  EXPECT_EQ(filler_credit(Filler::entity({"pro"}), Filler::mention("pro"), agent, doc), 1.0);
  // The best predicted mention counts; any foreign mention voids the filler.
  EXPECT_EQ(filler_credit(full, Filler::entity({"nom", "pro"}), agent, doc), 0.5);
  EXPECT_EQ(filler_credit(full, Filler::entity({"name", "jones"}), agent, doc), 0.0);
  EXPECT_EQ(filler_credit(full, Filler::mention("jones"), agent, doc), 0.0);
}

TEST(FillerCreditTest, EventsBooleansCategories) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  const SlotDef &event = slot_def(*ontology, "Event");
  const Filler cluster = Filler::event({"ev1", "ev2"});
  EXPECT_EQ(filler_credit(cluster, Filler::mention("ev2"), event, doc), 1.0);
  EXPECT_EQ(filler_credit(cluster, Filler::event({"ev1", "ev2"}), event, doc), 1.0);
  EXPECT_EQ(filler_credit(cluster, Filler::event({"ev1", "jones"}), event, doc), 0.0);
  const SlotDef &killed = slot_def(*ontology, "Killed");
  EXPECT_EQ(filler_credit(Filler::boolean(true), Filler::boolean(true), killed, doc), 1.0);
  EXPECT_EQ(filler_credit(Filler::boolean(true), Filler::boolean(false), killed, doc), 0.0);
  const SlotDef &severity = slot_def(*ontology, "Severity");
  EXPECT_EQ(filler_credit(Filler::categorical("high"), Filler::categorical("high"), severity,
                          doc),
            1.0);
  EXPECT_EQ(
      filler_credit(Filler::categorical("high"), Filler::categorical("low"), severity, doc),
      0.0);
}

TEST(FillerCreditTest, MixedSlotDispatchesOnKind) {
  const SlotDef mixed{"Thing", SlotKind::kMixed, {}, false};
  Document doc = harm_doc();
  EXPECT_EQ(filler_credit(Filler::event({"ev1", "ev2"}), Filler::mention("ev1"), mixed, doc),
            1.0);
  EXPECT_EQ(filler_credit(Filler::entity({"name", "nom"}), Filler::mention("nom"), mixed, doc),
            0.5);
  EXPECT_EQ(filler_credit(Filler::event({"ev1"}), Filler::entity({"ev1"}), mixed, doc), 0.0);
}

TEST(FillerCreditTest, TimeAndIrrealisSchedule) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  const SlotDef &victim = slot_def(*ontology, "Victim");
  const Filler ref =
      with_time(Filler::entity({"jones"}), {"monday", "noon"}, Irrealis::kHypothetical);
  EXPECT_EQ(filler_credit(ref,
                          with_time(Filler::mention("jones"), {"noon", "monday"},
                                    Irrealis::kHypothetical),
                          victim, doc),
            1.0);
  EXPECT_EQ(filler_credit(ref,
                          with_time(Filler::mention("jones"), {"monday", "noon"},
                                    Irrealis::kFuture),
                          victim, doc),
            0.75);
  EXPECT_EQ(filler_credit(ref, with_time(Filler::mention("jones"), {"monday"}, std::nullopt),
                          victim, doc),
            0.5);
  EXPECT_EQ(filler_credit(ref,
                          with_time(Filler::mention("name"), {"monday", "noon"},
                                    Irrealis::kHypothetical),
                          victim, doc),
            0.0);
}

TemplateInstance perfect_harm() {
  return TemplateInstance{
      "Harm",
      {{"Agent", {Filler::entity({"name", "nom", "pro"})}},
       {"Victim", {with_time(Filler::entity({"jones"}), {"monday"}, Irrealis::kFuture)}},
       {"Event", {Filler::event({"ev1", "ev2"})}},
       {"Killed", {Filler::boolean(false)}},
       {"Severity", {Filler::categorical("high")}}}};
}

TEST(GranularScoreTest, PerfectPrediction) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  TemplateInstance pred = perfect_harm();
  pred.fillers["Agent"] = {Filler::mention("name")};
  const GranularReport r = granular_score({perfect_harm()}, {pred}, doc, *ontology);
  EXPECT_EQ(r.type_f1.f1, 1.0);
  EXPECT_EQ(r.slot_f1.f1, 1.0);
  EXPECT_EQ(r.combined, 1.0);
}

TEST(GranularScoreTest, PronounFixture) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  TemplateInstance ref{"Harm", {{"Agent", {Filler::entity({"name", "nom", "pro"})}}}};
  TemplateInstance pred{"Harm", {{"Agent", {Filler::mention("pro")}}}};
  const GranularReport r = granular_score({ref}, {pred}, doc, *ontology);
  EXPECT_EQ(r.slot_credit, 0.25);
  EXPECT_EQ(r.slot_f1.f1, 0.25);
  EXPECT_EQ(r.type_f1.f1, 1.0);
  EXPECT_EQ(r.combined, 0.25);
}

TEST(GranularScoreTest, CombinedIsProductWithHandValues) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  // One aligned Harm (Agent via nominal 0.5, Victim 0.75, wrong Killed),
  // one spurious Protest.
  TemplateInstance pred{
      "Harm",
      {{"Agent", {Filler::mention("nom")}},
       {"Victim", {with_time(Filler::mention("jones"), {"monday"}, Irrealis::kHypothetical)}},
       {"Killed", {Filler::boolean(true)}}}};
  TemplateInstance protest{"Protest", {{"Agent", {Filler::mention("jones")}}}};
  const GranularReport r = granular_score({perfect_harm()}, {pred, protest}, doc, *ontology);
  EXPECT_EQ(r.matched_templates, 1u);
  // Type: P = 1/2, R = 1/1.
  EXPECT_DOUBLE_EQ(r.type_f1.f1, 2.0 / 3.0);
  // Slots: credit 1.25 over 4 predicted and 5 reference fillers.
  EXPECT_EQ(r.slot_credit, 1.25);
  EXPECT_EQ(r.n_pred_fillers, 4u);
  EXPECT_EQ(r.n_ref_fillers, 5u);
  const double p = 1.25 / 4.0, rec = 1.25 / 5.0;
  EXPECT_DOUBLE_EQ(r.slot_f1.f1, 2.0 * p * rec / (p + rec));
  EXPECT_EQ(r.combined, r.type_f1.f1 * r.slot_f1.f1);
}

TEST(GranularScoreTest, AlignmentMaximizesCorrectFillers) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  TemplateInstance a{"Harm", {{"Agent", {Filler::entity({"name"})}}}};
  TemplateInstance b{"Harm", {{"Agent", {Filler::entity({"jones"})}}}};
  TemplateInstance pa{"Harm", {{"Agent", {Filler::mention("name")}}}};
  TemplateInstance pb{"Harm", {{"Agent", {Filler::mention("jones")}}}};
  const GranularReport r = granular_score({a, b}, {pb, pa}, doc, *ontology);
  ASSERT_EQ(r.alignment.at("d").size(), 2u);
  EXPECT_EQ(r.alignment.at("d")[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(r.alignment.at("d")[1], (std::pair<std::size_t, std::size_t>{1, 0}));
  EXPECT_EQ(r.combined, 1.0);
}

TEST(GranularScoreTest, CombinedProductOnRandomInputs) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  const std::vector<std::string> ids = {"name", "nom", "pro", "jones", "ev1", "ev2"};
  std::mt19937_64 rng(3);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto random_template = [&]() {
    TemplateInstance t{pick(4) == 0 ? "Protest" : "Harm", {}};
    for (int k = 0; k < 3; ++k) {
      t.fillers["Agent"].push_back(Filler::entity({ids[pick(4)], ids[pick(4)]}));
    }
    if (t.type == "Harm") {
      t.fillers["Victim"].push_back(with_time(Filler::entity({ids[pick(4)]}),
                                              {pick(2) ? "monday" : "noon"},
                                              pick(2) ? Irrealis::kFuture : Irrealis::kUnconfirmed));
      t.fillers["Event"].push_back(Filler::event({ids[4 + pick(2)]}));
      t.fillers["Killed"].push_back(Filler::boolean(pick(2) == 0));
    }
    return t;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TemplateInstance> ref, pred;
    for (std::size_t i = pick(4); i > 0; --i) ref.push_back(random_template());
    for (std::size_t i = pick(4); i > 0; --i) pred.push_back(random_template());
    const GranularReport r = granular_score(ref, pred, doc, *ontology);
    EXPECT_EQ(r.combined, r.type_f1.f1 * r.slot_f1.f1);
    for (double x : {r.type_f1.f1, r.slot_f1.f1, r.slot_f1.precision, r.slot_f1.recall}) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(GranularScoreTest, Errors) {
  auto ontology = harm_ontology();
  Document doc = harm_doc();
  TemplateInstance bad{"Protest", {{"Victim", {Filler::mention("jones")}}}};
  try {
    granular_score({bad}, {}, doc, *ontology);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kOntologyMismatch);
  }
  Corpus corpus;
  corpus.ontology = ontology;
  corpus.documents.push_back(doc);
  try {
    granular_corpus(corpus, {{"missing", {}}});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownDocument);
  }
}

TEST(GranularScoreTest, CorpusPoolingAndSerialization) {
  auto ontology = harm_ontology();
  Corpus corpus;
  corpus.ontology = ontology;
  corpus.documents.push_back(harm_doc());
  corpus.gold["d"] = {perfect_harm()};
  const GranularReport none = granular_corpus(corpus, {});
  EXPECT_EQ(none.combined, 0.0);
  EXPECT_TRUE(none.type_f1.precision_empty);
  const GranularReport same = granular_corpus(corpus, corpus.gold);
  EXPECT_EQ(same.combined, 1.0);
  const auto json = to_json(same);
  EXPECT_EQ(json.at("combined"), 1.0);
  EXPECT_EQ(json.at("variant"), "granular");
  EXPECT_NE(to_csv(same).find("combined"), std::string::npos);
  EXPECT_NE(to_pretty(same).find("Combined"), std::string::npos);
}

}  // namespace
}  // namespace iterx
