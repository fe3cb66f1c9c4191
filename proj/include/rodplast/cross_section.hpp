#ifndef RODPLAST_CROSS_SECTION_HPP
#define RODPLAST_CROSS_SECTION_HPP

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rodplast/algebra.hpp"
#include "rodplast/section.hpp"

namespace rodplast {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Symmetric fourth-order elasticity tensor acting on 3x3 matrices through
/// their symmetric part, stored as a 6x6 matrix in the orthonormal
/// (Mandel) basis of symmetric matrices.
struct ElasticTensor {
    Mat6 mandel = Mat6::Identity();

    static ElasticTensor isotropic(double mu, double lambda = 0.0);

    static Vec6 to_mandel(const Mat3& g);
    static Mat3 from_mandel(const Vec6& v);

    Mat3 apply(const Mat3& g) const;    // C_el g
    double quad(const Mat3& g) const;   // g : C_el g
    double inner(const Mat3& a, const Mat3& b) const; // a : C_el b

    double coercivity_lower() const; // smallest eigenvalue on sym matrices
    double coercivity_upper() const;
};

/// Plastic strain (or any symmetric matrix field) sampled on the quadrature
/// points of one cross-section slice.
struct SectionStrainField {
    std::vector<Mat3> samples;

    SectionStrainField() = default;
    explicit SectionStrainField(int n) : samples(n, Mat3::Zero()) {}

    static SectionStrainField from_function(const SectionMesh& mesh,
                                            const std::function<Mat3(const Vec2&)>& f);
    int size() const { return static_cast<int>(samples.size()); }
};

/// Axial stretch / in-section displacement corrector for a given strain field.
struct AuxCorrector {
    double a = 0.0;
    Eigen::VectorXd phi;              // nodal values, 3 per vertex
    std::vector<Mat3> chi;            // sym(a e1 | grad phi) at quadrature points
};

/// Cross-section homogenization model: corrector solutions for the three
/// bending/twist strains, the gram matrix of the induced strain fields, and
/// the projection operators acting on sampled plastic strains.
class CrossSectionModel {
  public:
    /// Solves the three constrained corrector problems on the mesh and
    /// assembles the gram matrix. Throws SolverFailure on singular systems.
    static CrossSectionModel solve_correctors(SectionMesh mesh, const ElasticTensor& tensor);

    /// Disc model with closed-form coefficients for the isotropic zero-Poisson
    /// law: vanishing correctors, exact gram mu/(8 pi) I. Auxiliary solves
    /// still run on the mesh.
    static CrossSectionModel analytic_disc(double mu, int refinement);

    const SectionMesh& mesh() const { return mesh_; }
    const ElasticTensor& tensor() const { return tensor_; }
    const Mat3& gram() const { return gram_; }
    const Mat3& gram_inverse() const { return gram_inv_; }
    double corrector_a(int i) const { return a_[i]; }
    const Eigen::VectorXd& corrector_phi(int i) const { return phi_[i]; }
    const Mat3& psi(int i, int q) const { return psi_[q][i]; }

    /// Effective bending-torsion energy density, Q_el^eff(K) = k^T gram k.
    double q_eff(const SkewCoeffs& k) const;

    /// Effective plastic curvature of a sampled strain field.
    SkewCoeffs k_eff(const SectionStrainField& z) const;

    /// Residual strain: the part of z orthogonal (in the C_el inner product)
    /// to both the bending/twist strains and the relaxation space.
    SectionStrainField z_res(const SectionStrainField& z) const;

    /// Relaxed energy density via the effective quantities:
    /// q_eff(K - k_eff(z)) + ||z_res||_Q^2.
    double relaxed_energy_density(const SkewCoeffs& k, const SectionStrainField& z) const;

    /// Same quantity via one constrained minimization (independent route).
    double relaxed_energy_density_direct(const SkewCoeffs& k, const SectionStrainField& z) const;

    /// Constrained minimizer of int Q_el(sym(a e1 | grad phi) + z).
    AuxCorrector solve_aux(const SectionStrainField& z) const;

    /// (z, Psi_j)_Q for j = 1..3.
    Vec3 psi_inner(const SectionStrainField& z) const;

    /// Weighted Q-norm squared of a sampled field.
    double q_norm_sq(const SectionStrainField& z) const;

    double mean_constraint_residual() const { return mean_constraint_residual_; }
    double rotation_constraint_residual() const { return rotation_constraint_residual_; }

    std::string to_json_string() const; // schema "xsec-v1"
    static CrossSectionModel from_json_string(const std::string& text);

    CrossSectionModel(CrossSectionModel&&) noexcept;
    CrossSectionModel& operator=(CrossSectionModel&&) noexcept;
    ~CrossSectionModel();

  private:
    CrossSectionModel();

    void build_system();          // assemble + factorize the saddle system
    void solve_corrector_block(); // the three K_i problems
    void check_field(const SectionStrainField& z) const;

    SectionMesh mesh_;
    ElasticTensor tensor_;
    std::array<double, 3> a_{};
    std::array<Eigen::VectorXd, 3> phi_;
    std::vector<std::array<Mat3, 3>> psi_;  // per quad point
    std::vector<std::array<Mat3, 3>> cpsi_; // C_el Psi_i per quad point
    Mat3 gram_ = Mat3::Zero();
    Mat3 gram_inv_ = Mat3::Zero();
    double mean_constraint_residual_ = 0.0;
    double rotation_constraint_residual_ = 0.0;

    struct System;
    std::unique_ptr<System> system_;
};

} // namespace rodplast

#endif
