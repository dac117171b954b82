#pragma once

#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace latmap {

// Unordered pair of distinct lattice directions out of {1, ..., n}, stored
// with i < j. A face {i,j} labels the field x_ij attached to it; whether
// x_ji means x_ij or -x_ij is a property of the family (its symmetry flag),
// not of the face.
struct FaceVariable {
  int i, j;

  FaceVariable(int a, int b) : i(a < b ? a : b), j(a < b ? b : a) {
    if (a == b) throw std::invalid_argument("face needs two distinct indices");
  }

  bool contains(int dir) const { return dir == i || dir == j; }

  // The other index of a face containing `dir`.
  int other(int dir) const { return dir == i ? j : i; }

  friend bool operator==(const FaceVariable& a, const FaceVariable& b) {
    return a.i == b.i && a.j == b.j;
  }
  friend bool operator!=(const FaceVariable& a, const FaceVariable& b) {
    return !(a == b);
  }
  friend bool operator<(const FaceVariable& a, const FaceVariable& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  }

  // "12", "13", ...; used in report keys and token names.
  std::string digits() const { return std::to_string(i) + std::to_string(j); }
  std::string name() const { return "x" + digits(); }
};

// All faces of the n-cube in lexicographic order. The position of a face in
// this listing is its polynomial variable id, so ids 0 .. n(n-1)/2 - 1 are
// face variables and any id beyond that range is free for other uses (the
// classification module spends them on symbolic coefficients).
inline std::vector<FaceVariable> enumerate_faces(int n) {
  if (n < 3) throw std::invalid_argument("need dimension >= 3");
  std::vector<FaceVariable> faces;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) faces.push_back(FaceVariable(i, j));
  return faces;
}

inline int face_count(int n) { return n * (n - 1) / 2; }

inline int face_variable_id(const FaceVariable& f, int n) {
  if (f.i < 1 || f.j > n)
    throw std::invalid_argument("face " + f.digits() + " outside dimension " +
                                std::to_string(n));
  return (f.i - 1) * n - (f.i - 1) * f.i / 2 + (f.j - f.i - 1);
}

inline FaceVariable face_from_id(int id, int n) {
  for (int i = 1; i <= n; ++i) {
    int block = n - i;
    if (id < block) return FaceVariable(i, i + 1 + id);
    id -= block;
  }
  throw std::invalid_argument("face id out of range");
}

}  // namespace latmap
