//! A laboratory for fair division of indivisible goods among strategic
//! agents: picking-sequence and envy-graph mechanisms, EF1 audits,
//! brute-force manipulation search, and the reference hard instances that
//! pin down their incentive ratios.

pub mod analysis;
pub mod fairness;
pub mod incentives;
pub mod instances;
pub mod io;
pub mod mechanism;
pub mod model;
pub mod report;
pub mod sampling;
pub mod valuation;

pub use analysis::{
    build_stage_mappings, dominance_check, verify_factor_two_bound, AnalysisError,
    FactorTwoCheck, StageMapping,
};
pub use fairness::{
    audit_alpha_ef1, is_alpha_ef1, is_ef1, is_envy_free, max_envy, FairnessReport, PairAudit,
};
pub use instances::{
    audit_chain, audit_chain_with, envy_graph_hard_instances, phi, submodular_hard_instance,
    thm1_chain, thm4_chain, xos_hard_instance, AuditFinding, ChainWitness, DeviationEdge,
    HardInstance, InstanceError, NamedProfile, ProfileChain, Replay,
};
pub use incentives::{
    best_manipulation, instance_incentive_ratio, lift_mechanism, order_report, probe_control,
    strongly_desires, ControlProbe, LiftError, LiftedRun, Misreport, MisreportFamily, Ratio,
    SearchError, Witness,
};
pub use io::{
    allocation_json, format_rational, instance_json, parse_allocation, parse_instance,
    parse_rational, valuation_json, write_instance, IoError,
};
pub use mechanism::{
    build_envy_graph, eliminate_envy_cycles, run_mechanism, run_mechanism_with_order, Mechanism,
    MechanismError, Run, Trace, TraceStep,
};
pub use model::{
    make_allocation, rational, rational_int, Allocation, AllocationError, Bundle, Good, Rational,
    Value, REAL_TOLERANCE,
};
pub use report::{emit_csv, Report, ReportError, ReproRow, Status};
pub use valuation::{
    check_class, lift, AdditiveValuation, CheckError, ClassCheck, Counterexample,
    CoverageValuation, DiscountedValuation, LiftedValuation, MultiplicativeValuation,
    TableValuation, Valuation, ValuationClass, ValuationError, XosValuation,
};
