#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ehtk/io.hpp"

#include <filesystem>

using namespace ehtk;
namespace fs = std::filesystem;

TEST_CASE("binary state files") {
  CVector amp(4);
  amp << cplx(0.5, 0), cplx(0, 0.5), cplx(-0.5, 0), cplx(0, -0.5);
  const PureState psi(2, amp);
  const std::string bytes = encode_state(psi);
  REQUIRE(bytes.size() == 9 + 4 + 4 * 16);
  CHECK(bytes.substr(0, 9) == "EHTSTATE1");
  CHECK(bytes[9] == 2);
  CHECK(bytes[10] == 0);
  double re1 = 0, im1 = 0;
  std::memcpy(&re1, bytes.data() + 13 + 16, 8);
  std::memcpy(&im1, bytes.data() + 13 + 24, 8);
  CHECK(re1 == 0.0);
  CHECK(im1 == 0.5);
  CHECK(decode_state(bytes).amplitudes() == amp);

  CHECK_THROWS_AS(decode_state("EHTSTATE2" + bytes.substr(9)), ValidationError);
  CHECK_THROWS_AS(decode_state(bytes.substr(0, bytes.size() - 1)), ValidationError);
  std::string bad = bytes;
  std::memset(bad.data() + 13, 0, 16);  // breaks the normalization
  CHECK_THROWS_AS(decode_state(bad), ValidationError);

  const fs::path p = fs::temp_directory_path() / "ehtk-test-io" / "s.bin";
  write_state_file(p, ground_state(build_xxz(6, 1, 1)).state);
  CHECK(read_state_file(p).n_sites() == 6);
  fs::remove_all(p.parent_path());
}

TEST_CASE("dataset JSON lines") {
  MeasurementDataset d{{2, 3}, 10, 42, "src", {{"XZ", {{"01", 5}, {"10", 5}}}, {"ZZ", {{"11", 10}}}}};
  const std::string text = encode_dataset(d);
  CHECK(text ==
        "{\"register\":[2,3],\"shots\":10,\"seed\":42,\"source\":\"src\"}\n"
        "{\"axes\":\"XZ\",\"counts\":{\"01\":5,\"10\":5}}\n"
        "{\"axes\":\"ZZ\",\"counts\":{\"11\":10}}\n");
  const MeasurementDataset back = decode_dataset(text);
  CHECK(back.register_sites == d.register_sites);
  CHECK(back.tag() == d.tag());
  CHECK(back.records[0].counts == d.records[0].counts);

  const auto sym = z2_symmetrize_dataset(d);
  const std::string half = encode_dataset(sym);
  CHECK(half.find("\"00\":2.5,\"01\":2.5") != std::string::npos);
  CHECK(half.find("\"00\":5,\"11\":5") != std::string::npos);
  CHECK(decode_dataset(half).records[1].counts == sym.records[1].counts);

  CHECK_THROWS_AS(decode_dataset(""), ValidationError);
  CHECK_THROWS_AS(decode_dataset("{\"register\":[0],\"shots\":1,\"seed\":0}\n"), ValidationError);
  CHECK_THROWS_AS(decode_dataset("{\"register\":[0],\"shots\":1,\"seed\":0,\"source\":\"s\"}\n{\"axes\":\"Q\",\"counts\":{}}\n"),
                  ValidationError);
  CHECK_THROWS_AS(decode_dataset("{\"register\":[0],\"shots\":1,\"seed\":0,\"source\":\"s\"}\n{\"axes\":\"X\",\"counts\":{\"01\":1}}\n"),
                  ValidationError);
  CHECK_THROWS_AS(decode_dataset("not json\n"), ValidationError);
}

TEST_CASE("model, couplings and noise documents") {
  const Json m = to_json(build_xxz(5, 1.5, 0.7));
  CHECK(m.dump() == "{\"n\":5,\"j\":1.5,\"delta\":0.7}");
  const SpinModel back = spin_model_from_json(m);
  CHECK(back.n_sites() == 5);
  CHECK(back.anisotropy_delta() == 0.7);
  CHECK_THROWS_AS(spin_model_from_json(Json{{"n", 5}}), ValidationError);

  const CouplingMatrix c = power_law_couplings(3, 2.0, 1.0);
  const Json cj = to_json(c);
  CHECK(cj["values"].size() == 9);
  CHECK(cj["values"][1] == 2.0);
  CHECK(coupling_matrix_from_json(cj).values == c.values);
  Json asym = cj;
  asym["values"][1] = 5.0;
  CHECK_THROWS_AS(coupling_matrix_from_json(asym), ValidationError);

  CHECK(noise_from_json(to_json(NoiseParams{0.1, 0.2})).p2 == 0.2);
  CHECK_THROWS_AS(noise_from_json(Json{{"p1", 2.0}, {"p2", 0.0}}), ValidationError);
}

TEST_CASE("fit results round trip") {
  FitResult f;
  f.variant = AnsatzVariant::PolynomialProfile;
  f.geometry = {1, 2, 3, 4};
  f.beta = RVector::LinSpaced(3, 0.1, 0.3);
  f.chi2 = 1e-3;
  f.noise = {0.01, 0.02};
  f.xi = RVector::LinSpaced(16, 1, 2);
  f.data_tag = {9, "x/fit"};
  const Json j = to_json(f);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(std::vector<std::string>(keys.begin(), keys.begin() + 6) ==
        std::vector<std::string>{"variant", "geometry", "beta", "chi2", "noise", "xi"});
  CHECK(j["variant"] == "polynomial-profile");
  const FitResult back = fit_result_from_json(Json::parse(j.dump()));
  CHECK(back.beta == f.beta);
  CHECK(back.xi == f.xi);
  CHECK(back.data_tag == f.data_tag);
  Json bad = j;
  bad["chi2"] = -1.0;
  CHECK_THROWS_AS(fit_result_from_json(bad), ValidationError);
}

TEST_CASE("CSV tables and digests") {
  const EntropyScaling s = entropy_scaling({{2, 0.5}, {3, 0.5}, {4, 0.5}});
  CHECK(scaling_table(s).str() == "L_A,S,slope\n2,0.5,0\n3,0.5,0\n4,0.5,0\n");
  CHECK(profile_table({0, 1}, {1.5, 2.5}, {2, 2}).str() == "site,beta,beta_ref\n0,1.5,2\n1,2.5,2\n");
  WindowedFidelity w;
  w.windows = {{3, 0.9, 0.95, 0.01}};
  CHECK(verification_table(w).str() == "window_start,f_max,f_mean,err\n3,0.9,0.95,0.01\n");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
