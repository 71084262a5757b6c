//! Print the soliton profile diagnostics and the derived constants.
//!
//! cargo run --release -p csgs --example constants

fn main() {
    let (profile, c) = csgs::townes::cached();
    println!("amplitude Q(0)   = {:.15}", c.amplitude);
    println!("g*(0) = ||Q||^2  = {:.15}", c.g_star0);
    println!("Q_2 (s = 2)      = {:.15}", c.q_s);
    println!("A_0              = {:.15}", c.a0);
    println!("||grad Q0||^2    = {:.15}", c.grad_q0_sq);
    println!("int Q0^4         = {:.15}  (2/g*(0) = {:.15})", c.q0_fourth, 2.0 / c.g_star0);
    println!("ODE residual     = {:.3e}", profile.residual());
    println!("tail coefficient = {:.12}", profile.tail_coeff());
    println!("Q(r_max)/Q(0)    = {:.3e}", profile.q.last().unwrap() / c.amplitude);
}
