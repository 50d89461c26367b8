#include <gtest/gtest.h>

#include "vigil/signal.hpp"

using namespace vigil;
using VC = VigilanceClass;

namespace {

Session ramp_session(std::size_t n_samples, int fs, std::size_t n_channels = 2) {
  Session s;
  s.subject_id = "s";
  s.fs = fs;
  for (std::size_t c = 0; c < n_channels; ++c) s.channels.push_back("c" + std::to_string(c));
  s.data = Matrix<float>(n_channels, n_samples);
  for (std::size_t c = 0; c < n_channels; ++c)
    for (std::size_t t = 0; t < n_samples; ++t) s.data(c, t) = static_cast<float>(c * 100000 + t);
  s.perclos.assign(s.n_epochs(), 0.1f);
  return s;
}

}  // namespace

TEST(LabelFromPerclos, Examples) {
  EXPECT_EQ(label_from_perclos(0.20), VC::Awake);
  EXPECT_EQ(label_from_perclos(0.70), VC::Drowsy);
  EXPECT_EQ(label_from_perclos(0.35), VC::Tired);
  EXPECT_EQ(label_from_perclos(0.0), VC::Awake);
  EXPECT_EQ(label_from_perclos(1.0), VC::Drowsy);
  EXPECT_EQ(label_from_perclos(0.6999), VC::Tired);
}

TEST(LabelFromPerclos, SinglePrecisionBoundariesStayInclusive) {
  EXPECT_EQ(label_from_perclos(0.35f), VC::Tired);
  EXPECT_EQ(label_from_perclos(0.7f), VC::Drowsy);
  EXPECT_EQ(label_from_perclos(std::nextafter(0.35f, 0.0f)), VC::Awake);
  EXPECT_EQ(label_from_perclos(std::nextafter(0.7f, 0.0f)), VC::Tired);
  EXPECT_THROW(label_from_perclos(1.5f), DomainError);
}

TEST(LabelFromPerclos, OutOfRangeThrows) {
  EXPECT_THROW(label_from_perclos(-0.01), DomainError);
  EXPECT_THROW(label_from_perclos(1.01), DomainError);
  EXPECT_THROW(label_from_perclos(std::nan("")), DomainError);
}

TEST(LabelFromPerclos, Monotone) {
  VC prev = VC::Awake;
  for (int i = 0; i <= 10000; ++i) {
    const VC c = label_from_perclos(i / 10000.0);
    EXPECT_LE(index_of(prev), index_of(c));
    prev = c;
  }
}

TEST(VigilanceClass, NamesRoundTrip) {
  for (auto c : kAllClasses) EXPECT_EQ(class_from_string(to_string(c)), c);
  EXPECT_FALSE(class_from_string("sleepy").has_value());
}

TEST(DefaultChannels, SeventeenWithoutCpz) {
  const auto& ch = default_channels();
  EXPECT_EQ(ch.size(), 17u);
  EXPECT_EQ(std::count(ch.begin(), ch.end(), "CPZ"), 0);
}

TEST(SegmentEpochs, CountsFromTable7) {
  // 885 epochs per session, as in the 23-subject corpus (20355 = 23 * 885).
  const int fs = 10;
  auto s = ramp_session(885u * 8u * fs + 37u, fs, 1);
  EXPECT_EQ(segment_epochs(s).size(), 885u);
}

TEST(SegmentEpochs, ExactAndPartialWindows) {
  const int fs = 200;
  auto one = ramp_session(8 * fs, fs);
  EXPECT_EQ(segment_epochs(one).size(), 1u);
  auto extra = ramp_session(8 * fs + 1, fs);
  const auto e = segment_epochs(extra);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].samples.cols(), static_cast<std::size_t>(8 * fs));
  auto short_s = ramp_session(8 * fs - 1, fs);
  EXPECT_TRUE(segment_epochs(short_s).empty());
}

TEST(SegmentEpochs, ConcatenationReproducesPrefix) {
  const int fs = 25;
  auto s = ramp_session(7 * 8 * fs + 13, fs, 3);
  s.perclos = {0.1f, 0.4f, 0.8f, 0.35f, 0.7f, 0.0f, 1.0f};
  const auto epochs = segment_epochs(s);
  ASSERT_EQ(epochs.size(), 7u);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    std::vector<float> joined;
    for (const auto& e : epochs) {
      auto r = e.samples.row(ch);
      joined.insert(joined.end(), r.begin(), r.end());
    }
    auto src = s.data.row(ch);
    ASSERT_EQ(joined.size(), 7u * 8u * fs);
    EXPECT_TRUE(std::equal(joined.begin(), joined.end(), src.begin()));
  }
  const std::vector<VC> want{VC::Awake, VC::Tired, VC::Drowsy, VC::Tired, VC::Drowsy, VC::Awake, VC::Drowsy};
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    EXPECT_EQ(epochs[k].index, k);
    EXPECT_EQ(epochs[k].label, want[k]);
  }
  EXPECT_EQ(epoch_labels(s), want);
}

TEST(Session, ValidateRejectsBrokenInvariants) {
  auto s = ramp_session(2 * 8 * 10, 10);
  EXPECT_NO_THROW(validate(s));
  auto wrong_count = s;
  wrong_count.perclos.push_back(0.1f);
  EXPECT_THROW(validate(wrong_count), DomainError);
  auto bad_fs = s;
  bad_fs.fs = 0;
  EXPECT_THROW(validate(bad_fs), DomainError);
  auto bad_p = s;
  bad_p.perclos[0] = 1.5f;
  EXPECT_THROW(validate(bad_p), DomainError);
  auto bad_rows = s;
  bad_rows.channels.push_back("extra");
  EXPECT_THROW(validate(bad_rows), DomainError);
}

TEST(SelectChannels, PicksRowsByLabel) {
  auto s = ramp_session(80, 10, 3);
  const auto sub = select_channels(s, {"c2", "c0"});
  ASSERT_EQ(sub.n_channels(), 2u);
  EXPECT_EQ(sub.data(0, 5), s.data(2, 5));
  EXPECT_EQ(sub.data(1, 5), s.data(0, 5));
  EXPECT_THROW(select_channels(s, {"nope"}), DomainError);
}
