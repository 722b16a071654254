use std::collections::BTreeMap;
use varjet::{top, SampleRanges, JetChart};
use varjet::jet::sample_jetpoint;
use varjet::variational::{euler_poisson, helmholtz};

fn main() {
    let form = euler_poisson(&top::l1());
    let sys = helmholtz(&form);
    let chart = JetChart::parametric(2, sys.point_order());
    let consts = BTreeMap::from([("mu".to_string(), 1.0)]);
    let p = sample_jetpoint(&chart, &SampleRanges::top_parametric(sys.point_order()), 7).unwrap();
    assert!(sys.max_rel(&p, &consts).unwrap() < 1e-9);
    println!("ok");
}
