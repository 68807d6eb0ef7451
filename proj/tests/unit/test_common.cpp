#include <doctest.h>

#include "synmind/common/rng.hpp"
#include "synmind/common/text.hpp"

using namespace synmind;

TEST_CASE("counter rng streams are deterministic and independent") {
  CounterRng a(42);
  CounterRng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng fork1 = CounterRng(42).fork("x").fork(3);
  CounterRng fork2 = CounterRng(42).fork("x").fork(3);
  CHECK(fork1.next_gaussian() == fork2.next_gaussian());

  CounterRng other = CounterRng(42).fork("x").fork(4);
  CHECK(CounterRng(42).fork("x").fork(3).next_u64() != other.next_u64());
}

TEST_CASE("uniform draws live in [0,1) with reasonable mean") {
  CounterRng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("gaussian draws have near-standard moments") {
  CounterRng rng(11);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_gaussian();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("tokenize strips punctuation and lowercases") {
  auto words = text::tokenize("A dog, on THE red sofa!");
  REQUIRE(words.size() == 6);
  CHECK(words[0] == "a");
  CHECK(words[1] == "dog");
  CHECK(words[5] == "sofa");
  CHECK(text::word_count("one  two\nthree.") == 3);
  CHECK(text::word_count("") == 0);
}

TEST_CASE("stemmer folds plurals and verb suffixes") {
  CHECK(text::stem("dogs") == "dog");
  CHECK(text::stem("running") == "runn");
  CHECK(text::stem("walked") == "walk");
  CHECK(text::stem("grass") == "grass");
  CHECK(text::stem("sofa") == "sofa");
}

TEST_CASE("content overlap counts stemmed reference content words") {
  // reference content words: dog, red, sofa; candidate covers only sofa.
  const double overlap =
      text::content_overlap("a cat on a sofa", "a dog on a red sofa");
  CHECK(overlap == doctest::Approx(1.0 / 3.0));

  CHECK(text::content_overlap("a dog on a red sofa", "a dog on a red sofa") ==
        doctest::Approx(1.0));
  // Empty reference content is a vacuous pass.
  CHECK(text::content_overlap("whatever", "a the on") == doctest::Approx(1.0));
}

TEST_CASE("truncate_words keeps exactly n words") {
  CHECK(text::truncate_words("one two three four", 2) == "one two");
  CHECK(text::word_count(text::truncate_words("a b c d e f", 4)) == 4);
}
