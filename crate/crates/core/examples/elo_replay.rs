//! Replays Elo over synthetic Bradley-Terry games and prints the loss curve
//! and the final ratings on the conventional display scale.

use ratelab::evaluation::{replay_rater, ReplayOptions};
use ratelab::raters::Elo;
use ratelab::synthetic::{gen_bt_matrix, sample_outcomes, schedule_uniform};
use ratelab::LearningRate;

fn main() -> ratelab::Result<()> {
    let (n, t, seed) = (20, 20_000, 1);
    let (truth, theta) = gen_bt_matrix(n, seed)?;
    let games = sample_outcomes(&truth, &schedule_uniform(n, t, seed)?, seed, "bt")?;

    let mut elo = Elo::new(n, LearningRate::Constant { eta: 0.04 });
    let opts = ReplayOptions {
        n_checkpoints: 10,
        ..Default::default()
    };
    for c in replay_rater(&mut elo, &games.games, opts)? {
        println!("t={:>6}  avg loss {:.4}", c.t, c.avg_loss);
    }

    println!("\nplayer  true θ   Elo θ   display");
    for (p, shown) in elo.display_scores().iter().enumerate().take(8) {
        println!("{p:>6}  {:>6.2}  {:>6.2}  {shown:>8.1}", theta[p], elo.theta[p]);
    }
    Ok(())
}
